//! End-to-end runs of the `hetsol` binary.

use std::path::Path;
use std::process::{Command, Output};

use hetsol_core::chartfield::{ChartGeometry, Dilaton, FieldExpr};
use hetsol_core::Rational;
use serde_json::Value;

fn hetsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetsol")).args(args).env_remove("HETSOL_MODE").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn record<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["records"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap_or_else(|| panic!("no record {name}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn float_verify_passes_and_exports_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("records.csv");
    let out = hetsol(&["verify", "--mode", "float", "--trials", "20", "--seed", "3", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["mode"], "float");
    assert_eq!(rep["seed"], 3);
    assert_eq!(rep["summary"]["failed"], 0);
    for r in rep["records"].as_array().unwrap() {
        assert!(!r["anchor"].as_str().unwrap().is_empty(), "{r}");
    }
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("name,anchor,defect,defect_value,samples,pass"));
    assert_eq!(text.lines().count(), 1 + rep["records"].as_array().unwrap().len());
}

#[test]
fn classify_reports_exact_constants() {
    let out = hetsol(&["classify", "--kappa", "3/2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let c = &json(&out)["payload"]["classification"];
    assert_eq!(c["s"], "-16");
    assert_eq!(c["e2phi"], "32");
    assert_eq!(c["branch"], "hyperbolic");
}

#[test]
fn negative_coupling_fails_with_detail() {
    let out = hetsol(&["classify", "--kappa", "-2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("first failure: classify.branch"), "{}", stderr(&out));
}

#[test]
fn mode_precedence_flag_over_env_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"mode": "exact", "seed": 11}"#);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hetsol"));
        cmd.args(["--config", &cfg, "classify"]).env_remove("HETSOL_MODE");
        if let Some(m) = env {
            cmd.env("HETSOL_MODE", m);
        }
        if let Some(m) = flag {
            cmd.args(["--mode", m]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        let rep = json(&out);
        assert_eq!(rep["seed"], 11);
        rep["mode"].as_str().unwrap().to_owned()
    };
    assert_eq!(run(None, None), "exact");
    assert_eq!(run(Some("float"), None), "float");
    assert_eq!(run(Some("float"), Some("exact")), "exact");
}

#[test]
fn malformed_inputs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"tolerances": {"fd": "small"}}"#);
    let out = hetsol(&["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tolerances.fd"), "{}", stderr(&out));

    let cfg = write(dir.path(), "zero.json", r#"{"trials": 0}"#);
    let out = hetsol(&["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trials"), "{}", stderr(&out));

    let out = hetsol(&["search", "--family", "nil"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown family `nil`"), "{}", stderr(&out));

    let chart = write(dir.path(), "chart.json", r#"{"domain": {"kind": "ball"}, "metric": {"11": 1}}"#);
    let out = hetsol(&["harmonic", "--chart", &chart]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("metric.12"), "{}", stderr(&out));
}

#[test]
fn harmonic_on_algebraic_samples() {
    let dir = tempfile::tempdir().unwrap();
    // s = -6, kappa = 1: f = |dphi|^2 - (5/2) e^{2phi} must equal 6 - 27 = -21.
    let good = write(
        dir.path(),
        "good.json",
        r#"{"samples": [
            {"ric": {"11": 0, "12": 0, "13": 0, "22": -3, "23": 0, "33": -3}, "dphi": [1, 0, 0], "e2phi": "44/5"},
            {"ric": {"11": 0, "12": 0, "13": 0, "22": -3, "23": 0, "33": -3}, "dphi": [2, 0, 0], "e2phi": 10}
        ]}"#,
    );
    let out = hetsol(&["harmonic", "--samples", &good]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(record(&rep, "harmonic.f_constancy")["defect"], "0");
    assert_eq!(rep["payload"]["vacuous"], false);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"samples": [{"ric": {"11": -3, "12": 0, "13": 0, "22": -3, "23": 0, "33": 0}, "dphi": [1, 0, 0], "e2phi": "44/5"}]}"#,
    );
    let out = hetsol(&["harmonic", "--samples", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("step `Ric(dphi) = 0` violated"), "{}", stderr(&out));
    assert_eq!(record(&json(&out), "harmonic.ricci_kills_gradient")["pass"], false);
}

#[test]
fn harmonic_on_a_chart_file() {
    let dir = tempfile::tempdir().unwrap();
    let psi = FieldExpr::constant(Rational::from_integer(48.into()));
    let chart = ChartGeometry::poincare_ball(Dilaton::Exp2Phi(psi)).to_json().to_string();
    let path = write(dir.path(), "ball.json", &chart);
    let out = hetsol(&["harmonic", "--chart", &path, "--point", "1/4,0,-1/8", "--point", "0,0,0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["payload"]["samples"], 2);
    assert_eq!(rep["payload"]["vacuous"], true);
}

#[test]
fn search_writes_history_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("history.csv");
    let grid = dir.path().join("grid.csv");
    let out = hetsol(&[
        "search",
        "--family",
        "hyperbolic-solvable",
        "--grid",
        "4",
        "--csv",
        hist.to_str().unwrap(),
        "--grid-csv",
        grid.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep = json(&out);
    assert!(record(&rep, "search.hyperbolic-solvable")["detail"].as_str().unwrap().starts_with("converged"));
    let h = std::fs::read_to_string(hist).unwrap();
    assert!(h.starts_with("family,iteration,a,e2phi,objective,damping,step_norm,accepted"));
    assert_eq!(std::fs::read_to_string(grid).unwrap().lines().count(), 1 + 16);
}

#[test]
fn linearize_float_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fd.csv");
    let report = dir.path().join("report.json");
    let out = hetsol(&[
        "linearize",
        "--mode",
        "float",
        "--samples",
        "2",
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(rep["command"], "linearize");
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 3);
}
