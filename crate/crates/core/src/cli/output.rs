//! CSV and JSON artifacts. Numbers are written with 17 significant digits
//! in exponent notation, so every value re-parses to the same `f64`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moment_ode::MomentPoint;
use crate::observables::{Histogram, MomentRecord};

pub const MOMENTS_FILE: &str = "moments.csv";
pub const ORACLE_FILE: &str = "moments_oracle.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const VERDICT_FILE: &str = "verdict.json";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn histogram_file_name(index: usize) -> String {
    format!("histogram_{index:04}.csv")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io(format!("writing {}: {e}", path.display()))
}

fn write_rows<const W: usize>(path: &Path, header: [&str; W], rows: impl Iterator<Item = [f64; W]>) -> Result<()> {
    let mut out = csv_writer(path)?;
    out.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        out.write_record(row.map(fmt_f64)).map_err(csv_err(path))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_moments_csv(path: &Path, records: &[MomentRecord]) -> Result<()> {
    write_rows(
        path,
        ["t", "eta", "eta_se", "psi", "psi_se", "zeta", "zeta_se", "xi", "xi_se"],
        records.iter().map(|r| {
            [
                r.t,
                r.eta.value,
                r.eta.stderr,
                r.psi.value,
                r.psi.stderr,
                r.zeta.value,
                r.zeta.stderr,
                r.xi.value,
                r.xi.stderr,
            ]
        }),
    )
}

pub fn write_oracle_csv(path: &Path, points: &[MomentPoint]) -> Result<()> {
    write_rows(
        path,
        ["t", "eta", "psi", "zeta", "xi"],
        points.iter().map(|p| [p.t, p.eta, p.psi, p.zeta, p.xi]),
    )
}

pub fn write_histogram_csv(path: &Path, hist: &Histogram) -> Result<()> {
    let mut out = csv_writer(path)?;
    out.write_record(["bin_lo", "bin_hi", "count"]).map_err(csv_err(path))?;
    for (i, &count) in hist.counts.iter().enumerate() {
        let (lo, hi) = hist.edges(i);
        out.write_record([fmt_f64(lo), fmt_f64(hi), count.to_string()])
            .map_err(csv_err(path))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    let mut file = File::create(path)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Reads back a numeric CSV written by this module.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("{}: bad number {field:?}: {e}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
