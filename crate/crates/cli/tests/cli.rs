use std::fs;
use std::process::Command;

fn pdmp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdmp"))
}

#[test]
fn simulate_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = pdmp()
        .args(["simulate", "--scenario", "nobra", "--replicates", "4", "--horizon", "100", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn failing_checks_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdmp().args(["simulate", "--scenario", "nobra", "--replicates", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(pdmp().args(["lyapunov", "--scenario", "nope"]).status().unwrap().code(), Some(2));

    // A corrupted golden constant is a check failure, not an error.
    let text = String::from_utf8(pdmp_core_json("ainscosta")).unwrap();
    let text = text.replacen("6.0", "7.0", 1);
    let cfg = dir.path().join("tampered.json");
    fs::write(&cfg, text).unwrap();
    let status = pdmp()
        .args(["simulate", "--replicates", "2", "--horizon", "50", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn sweep_writes_the_curve() {
    let dir = tempfile::tempdir().unwrap();
    let status = pdmp()
        .args(["sweep", "--scenario", "fmg3d", "--betas", "3,10", "--replicates", "5", "--horizon", "50", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("fig_lambda_beta.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

fn pdmp_core_json(name: &str) -> Vec<u8> {
    pdmp_core::experiments::lookup(name).unwrap().to_json().unwrap().into_bytes()
}
