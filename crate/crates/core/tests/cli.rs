use std::path::Path;
use std::process::{Command, Output};

use kac_bgk::cli::output::read_numeric_csv;

fn kac_bgk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kac-bgk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn minimal(out: &Path) -> Vec<String> {
    [
        "--n", "20", "--m", "5", "--lambda", "1", "--t-end", "1", "--sample-dt", "0.1",
        "--replicas", "10", "--seed", "42", "--output",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

fn run_with(cmd: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd.to_string()];
    args.extend(minimal(out));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    kac_bgk(&refs)
}

#[test]
fn simulate_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("simulate", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_numeric_csv(&dir.path().join("moments.csv")).unwrap();
    assert_eq!(
        header,
        ["t", "eta", "eta_se", "psi", "psi_se", "zeta", "zeta_se", "xi", "xi_se"]
    );
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows.iter().all(|r| r[3] >= 0.0 && r[7] >= 0.0 && r[2] >= 0.0));
    assert!(dir.path().join("config.json").exists());
    assert!(!dir.path().join("histogram_0000.csv").exists());
}

#[test]
fn simulate_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run_with("simulate", d.path(), &["--record-snapshots"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["moments.csv", "histogram_0000.csv", "histogram_0010.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let (header, rows) = read_numeric_csv(&a.path().join("histogram_0003.csv")).unwrap();
    assert_eq!(header, ["bin_lo", "bin_hi", "count"]);
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().map(|r| r[2]).sum::<f64>() <= 200.0);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_with("simulate", a.path(), &["--disable-kac"]).status.code(), Some(0));
    let echoed = a.path().join("config.json");
    let out = kac_bgk(&[
        "simulate",
        "--config",
        echoed.to_str().unwrap(),
        "--output",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.path().join("moments.csv")).unwrap(),
        std::fs::read(b.path().join("moments.csv")).unwrap()
    );
}

#[test]
fn invalid_sizes_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("simulate", dir.path(), &["--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_passive"));
    let out = run_with("simulate", dir.path(), &["--disable-exchange", "--disable-kac"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_with("simulate", dir.path(), &["--replicas", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"params": {"n_passive": 30, "n_active": 6, "lambda": 2.0, "seed": 1},
            "init": {"kind": "two_temperature", "sigma_passive": 0.5, "sigma_active": 2.0},
            "schedule": {"t_end": 0.5, "sample_times": [0.0, 0.25, 0.5]},
            "replicas": 4}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = kac_bgk(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "3",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("config.json")).unwrap())
            .unwrap();
    assert_eq!(echoed["params"]["lambda"], 3.0);
    assert_eq!(echoed["params"]["n_passive"], 30);
    assert_eq!(echoed["init"]["kind"], "two_temperature");
    let (_, rows) = read_numeric_csv(&out_dir.join("moments.csv")).unwrap();
    assert_eq!(rows.len(), 3);

    std::fs::write(&cfg, r#"{"params": {"n_pasive": 30}}"#).unwrap();
    let out = kac_bgk(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = run_with("simulate", &blocker.join("sub"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moments_at_the_fixed_point_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("moments", dir.path(), &["--t-end", "5", "--sample-dt", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_numeric_csv(&dir.path().join("moments_oracle.csv")).unwrap();
    assert_eq!(header, ["t", "eta", "psi", "zeta", "xi"]);
    assert_eq!(rows.len(), 11);
    for row in &rows {
        for c in 1..5 {
            let scale = rows[0][c].abs().max(1.0);
            assert!((row[c] - rows[0][c]).abs() <= 1e-10 * scale, "{row:?}");
        }
    }
}

#[test]
fn moments_echo_initial_values_and_ignore_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schedule": {"t_end": 1.0, "sample_times": [0.0]},
            "initial_moments": {"eta": 0.5, "psi": 0.75, "xi": 2.5, "zeta": -0.125}}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let out = kac_bgk(&["moments", "--config", cfg.to_str().unwrap(), "--output", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_numeric_csv(&a.join("moments_oracle.csv")).unwrap();
    assert_eq!(rows, vec![vec![0.0, 0.5, 0.75, -0.125, 2.5]]);

    let x = dir.path().join("x");
    let y = dir.path().join("y");
    for (d, seed) in [(&x, "1"), (&y, "99")] {
        let out = run_with("moments", d, &["--init", "two_temperature", "--seed", seed]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(x.join("moments_oracle.csv")).unwrap(),
        std::fs::read(y.join("moments_oracle.csv")).unwrap()
    );
}

#[test]
fn verify_energy_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kac_bgk(&["verify", "--suite", "energy", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS suite energy"));
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdict.json")).unwrap())
            .unwrap();
    assert_eq!(verdict["passed"], true);
    assert_eq!(verdict["suite"], "energy");
}

#[test]
fn verify_gap_refuses_exchange() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"flags": {"disable_exchange": false}}"#).unwrap();
    let out = kac_bgk(&[
        "verify",
        "--suite",
        "gap",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disable_exchange"));
}

#[test]
fn verify_eta_decay_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kac_bgk(&["verify", "--suite", "eta_decay", "--output", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("fitted rate"));
}

#[test]
fn verify_reports_check_failures_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    // the marginal suite includes a bound the exact density does not meet
    let out = kac_bgk(&["verify", "--suite", "marginal", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL marginal.sup_at_100"));
}
