use std::fs;
use std::path::Path;

use pdmp_core::experiments::*;
use pdmp_core::Error;

fn quick(name: &str) -> Scenario {
    let mut s = lookup(name).unwrap();
    s.replicates = 4;
    s.horizon = s.horizon.min(200.0);
    s.lyapunov.replicates = 20;
    s.lyapunov.horizon = 200.0;
    if let Some(h) = s.hitting.as_mut() {
        h.replicates = 100;
    }
    if let Some(c) = s.coupling.as_mut() {
        c.replicates = 10;
    }
    s.validate().unwrap();
    s
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn registry_covers_the_built_ins() {
    assert_eq!(registry().len(), NAMES.len());
    for s in registry() {
        assert!(!s.expectations.is_empty(), "{}", s.name);
        assert!(s.expectations.iter().all(|e| !e.source.is_empty()));
    }
    assert!(matches!(lookup("nope"), Err(Error::UnknownScenario(_))));
}

#[test]
fn config_round_trip_and_validation() {
    let s = lookup("astacoins").unwrap();
    let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
    assert_eq!(s, back);

    let mut v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("seed");
    assert!(Scenario::from_json(&v.to_string()).is_err());

    let mut bad = s.clone();
    bad.replicates = 0;
    assert!(bad.validate().is_err());
    let mut bad = s.clone();
    bad.rates.beta = 0.0;
    assert!(bad.validate().is_err());
    let mut bad = s.clone();
    bad.initial_conditions = vec![vec![0.5, 0.5, 0.5]];
    assert!(bad.validate().is_err());
    let mut bad = s;
    bad.hitting = None;
    assert!(bad.validate().is_err());
}

#[test]
fn quick_runs_pass_and_write_artifacts() {
    for name in ["nobra", "astacoins"] {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&quick(name), dir.path()).unwrap();
        assert!(report.passed, "{name}: {:?}", report.failures());
        assert!(dir.path().join("report.json").exists());
        assert!(report.artifacts.iter().all(|p| p.exists()));
        assert!(dir.path().join(format!("occupation_{name}.csv")).exists());
        assert!(dir.path().join(format!("fig_trajectories_{name}_0.csv")).exists());
        let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.checks.len(), report.checks.len());
        assert_eq!(report.steps.trajectories, report.scenario.replicates);
    }
}

#[test]
fn same_seed_same_bytes() {
    let s = quick("nobra");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&s, a.path()).unwrap();
    run(&s, b.path()).unwrap();
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}

#[test]
fn tampered_constant_fails_its_check() {
    let mut s = lookup("ainscosta").unwrap();
    s.diagnostics = vec![Diagnostic::Eigenvalues];
    s.expectations.retain(|e| {
        matches!(e.expectation, Expectation::ModeAbscissa { .. } | Expectation::AverageAbscissa { .. })
    });
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&s, dir.path()).unwrap().passed);

    let mut v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    let d0 = &mut v["system"]["fields"][0]["D"][0];
    *d0 = serde_json::json!(d0.as_f64().unwrap() + 1.0);
    let tampered = Scenario::from_json(&v.to_string()).unwrap();
    let report = run(&tampered, dir.path()).unwrap();
    assert!(!report.passed);
    assert!(report.checks.iter().any(|c| !c.passed && c.check.contains("abscissa")));
}
