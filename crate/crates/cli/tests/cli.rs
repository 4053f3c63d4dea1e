use std::process::{Command, Output};

use ecslab::EllipticContext;
use serde_json::Value;

fn ecslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .collect::<Result<_, _>>()
        .expect("valid CSV")
}

fn check<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == id)
        .unwrap_or_else(|| panic!("no check {id}"))
}

#[test]
fn prop1_example_passes() {
    let out = ecslab(&[
        "verify", "prop1", "--calN", "3", "--beta", "2.5", "--lambda", "1.3", "--masses", "1,-1,0.5", "--samples",
        "20", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["manifest"]["seed"], 7);
    assert!(check(&v, "prop1.analytic")["max_rel_residual"].as_f64().unwrap() < 1e-9);
    assert!(check(&v, "prop1.fd")["max_rel_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(check(&v, "prop1.analytic")["samples"].as_array().unwrap().len(), 20);
}

#[test]
fn cor2_picks_lambda_and_reports_ground_energy() {
    let out = ecslab(&["verify", "cor2", "--N", "2", "--Ntilde", "1", "--beta", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let expected = 1.5 * EllipticContext::new(3.0).unwrap().c0();
    let sample = &check(&v, "cor2.analytic")["samples"][0];
    assert_eq!(sample["params"]["lambda"], 0.5);
    let e0 = check(&v, "cor2.eigenvalue")["samples"][0]["params"]["E0"].as_f64().unwrap();
    assert!((e0 - expected).abs() < 1e-13, "{e0} vs {expected}");
}

#[test]
fn cor2_with_wrong_lambda_is_a_constraint_error() {
    let out = ecslab(&["verify", "cor2", "--N", "2", "--Ntilde", "1", "--lambda", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "constraint");
    assert_eq!(err["manifest"]["target"], "cor2");
}

#[test]
fn eigenvalue_table_has_one_row_per_label() {
    let out = ecslab(&["table", "eigenvalues", "--N", "2", "--Ntilde", "1", "--n", "-2..3", "--beta", "2.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 6);
    let labels: Vec<i64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert_eq!(labels, vec![-2, -1, 0, 1, 2, 3]);
    // (N, Ñ) = (2, 1): the c₀ bracket N − 1 − Ñ²/(N − 1) vanishes.
    for r in &rows {
        assert_eq!(r[8].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn balanced_constant_table_vanishes() {
    let out = ecslab(&["table", "constants", "--N", "1", "--Ntilde", "1", "--M", "1", "--Mtilde", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let c = v["rows"].as_array().unwrap().iter().find(|r| r[0] == "C").unwrap();
    assert_eq!(c[10].as_f64().unwrap(), 0.0);
    assert_eq!(c[11].as_f64().unwrap(), 0.0);
}

#[test]
fn trigonometric_coefficients() {
    let out = ecslab(&["table", "coefficients", "--q", "0", "--N", "2", "--Ntilde", "1", "--n", "0..2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    assert!((rows[0][7].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!(rows[0][8].parse::<f64>().unwrap().abs() < 1e-12);
}

#[test]
fn omit_timing_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    // Same path both times: the manifest records it.
    let path = dir.path().join("report.json");
    let run = || {
        let out = ecslab(&[
            "verify", "cor1", "--samples", "5", "--seed", "11", "--omit-timing", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(&path).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains("elapsed_ms"));
}

#[test]
fn different_seeds_draw_different_samples() {
    let a = json_stdout(&ecslab(&["verify", "prop1", "--samples", "3", "--seed", "1", "--omit-timing"]));
    let b = json_stdout(&ecslab(&["verify", "prop1", "--samples", "3", "--seed", "2", "--omit-timing"]));
    assert_ne!(check(&a, "prop1.analytic")["samples"], check(&b, "prop1.analytic")["samples"]);
}

#[test]
fn suite_csv_has_one_row_per_sample() {
    let out = ecslab(&["verify", "shift", "--samples", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[0] == "shift" && r[1].starts_with("shift.")));
}

#[test]
fn impossible_packing_is_a_constraint_error() {
    let out = ecslab(&["verify", "prop1", "--calN", "40", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vanishing_coefficient_is_a_numerical_error() {
    // At q = 0 the integrand has no positive powers of ξ, so P₋₁ = 0.
    let out = ecslab(&["verify", "cor3", "--q", "0", "--n", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "numerical");
}

#[test]
fn tight_tolerance_override_fails_the_suite() {
    let out = ecslab(&["verify", "prop1", "--samples", "3", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_stdout(&out)["pass"], false);
}

#[test]
fn bad_flags_are_rejected() {
    assert_eq!(ecslab(&["verify", "cor2", "--beta", "2", "--q", "0.3"]).status.code(), Some(2));
    assert_eq!(ecslab(&["verify", "prop1", "--fd-order", "3"]).status.code(), Some(2));
    assert_eq!(ecslab(&["verify", "prop1", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(ecslab(&["verify", "prop1", "--quad-nodes", "15"]).status.code(), Some(2));
}
