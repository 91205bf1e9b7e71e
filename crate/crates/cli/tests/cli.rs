use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn minstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minstab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn body(report: &str) -> Value {
    let mut v: Value = serde_json::from_str(report).expect("valid JSON");
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn verify_identities_passes_by_default() {
    let out = minstab(&["verify-identities", "--seed", "42", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    for check in report["suites"][0]["checks"].as_array().unwrap() {
        assert!(check["worst"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn same_seed_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = minstab(&["sign-scan", "--seed", "9", "--samples", "50", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let ra = std::fs::read_to_string(&a).unwrap();
    let rb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(serde_json::to_string(&body(&ra)).unwrap(), serde_json::to_string(&body(&rb)).unwrap());
    let other = minstab(&["sign-scan", "--seed", "10", "--samples", "50"]);
    assert_ne!(body(&String::from_utf8(other.stdout).unwrap()), body(&ra));
}

#[test]
fn corrupted_lambda_fails_with_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"spaces": [{"factor1": {"kind": "complex", "dim": 4, "lambda_squared_override": 1.5},
                        "factor2": {"kind": "flat", "dim": 2}}]}"#,
    );
    let out = minstab(&["verify-identities", "--config", &cfg, "--samples", "50"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(false));
    assert!(report["suites"][0]["checks"][0]["worst"].as_f64().unwrap() > 1e-3);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty_cases = write(dir.path(), "cases.json", r#"{"cases": []}"#);
    assert_eq!(minstab(&["classify", "--config", &empty_cases]).status.code(), Some(2));
    let bad_closure = write(
        dir.path(),
        "closure.json",
        r#"{"geodesics": [{"second": {"kind": "circle", "circumference": 6.283185307179586},
                           "speeds": [0.6, 0.8], "length": 5.0}]}"#,
    );
    let out = minstab(&["geodesic-index", "--config", &bad_closure]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closure"));
    let bad_tol = write(dir.path(), "tol.json", r#"{"tolerances": {"sign": 0}}"#);
    assert_eq!(minstab(&["sign-scan", "--config", &bad_tol]).status.code(), Some(2));
    assert_eq!(minstab(&["sign-scan", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(minstab(&["sign-scan", "--samples", "0"]).status.code(), Some(2));
    let garbage = write(dir.path(), "garbage.json", "{ not json");
    assert_eq!(minstab(&["classify", "--config", &garbage]).status.code(), Some(2));
}

#[test]
fn histogram_rows_sum_to_samples() {
    let out = minstab(&["sign-scan", "--samples", "37"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let summaries = report["suites"][0]["q_summaries"].as_array().unwrap();
    assert!(!summaries.is_empty());
    for s in summaries {
        let total: u64 = s["histogram"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
        assert_eq!(total, 37);
        assert_eq!(s["count"].as_u64(), Some(37));
    }
}

#[test]
fn csv_output() {
    let out = minstab(&["verify-identities", "--samples", "20", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["suite", "table", "item", "metric", "value"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let worst = rows.iter().find(|r| &r[1] == "check" && &r[3] == "worst").unwrap();
    assert!(worst[4].contains('e'));
    assert!(worst[4].parse::<f64>().unwrap() < 1e-9);
}

#[test]
fn numbers_have_17_significant_digits() {
    let out = minstab(&["geodesic-index", "--config", "/dev/null"]);
    // an empty file is not a valid config
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"canonical_nodes": 64, "geodesics": []}"#);
    let out = minstab(&["geodesic-index", "--config", &cfg]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lam = text.split("\"lambda_min\":").nth(1).unwrap();
    let mantissa = lam.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{mantissa}");
}

#[test]
fn print_config_round_trips() {
    let out = minstab(&["classify", "--print-config"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = minstab_cli::SuiteConfig::from_json(&text).unwrap();
    assert_eq!(parsed, minstab_cli::SuiteConfig::default());
}
