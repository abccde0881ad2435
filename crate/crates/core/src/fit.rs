//! Weighted log-linear fits of exponentially decaying signals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with `|value| <= SIGNAL_TO_NOISE * stderr` are dropped before fitting.
pub const SIGNAL_TO_NOISE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted rate `r` in `A e^{−r t}`.
    pub rate: f64,
    pub rate_stderr: f64,
    pub amplitude: f64,
    pub points: usize,
}

/// Fits `y ≈ A e^{−r t}` by weighted least squares on `ln y`, using the
/// delta-method variance `(se / y)²` for each point. Points whose value is
/// not clearly positive are ignored.
pub fn fit_exponential_decay(t: &[f64], y: &[f64], se: &[f64]) -> Result<DecayFit> {
    if t.len() != y.len() || t.len() != se.len() {
        return Err(Error::InvalidParams(format!(
            "fit inputs differ in length ({}, {}, {})",
            t.len(),
            y.len(),
            se.len()
        )));
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut points = 0;
    for i in 0..t.len() {
        if !(y[i] > SIGNAL_TO_NOISE * se[i]) {
            continue;
        }
        let ly = y[i].ln();
        let rel = se[i] / y[i];
        let w = if rel > 0.0 { 1.0 / (rel * rel) } else { 1e12 };
        sw += w;
        sx += w * t[i];
        sy += w * ly;
        sxx += w * t[i] * t[i];
        sxy += w * t[i] * ly;
        points += 1;
    }
    if points < 3 {
        return Err(Error::InsufficientData(format!(
            "only {points} points above noise level"
        )));
    }
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::InsufficientData("fit times are degenerate".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    Ok(DecayFit {
        rate: -slope,
        rate_stderr: (sw / det).sqrt(),
        amplitude: intercept.exp(),
        points,
    })
}
