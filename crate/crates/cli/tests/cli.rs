use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_config(sub: &str, text: &str, extra: &[&str]) -> Output {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "config.json", text);
    let mut args = vec![sub, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    casimir(&args)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parses the single-line error record and returns it.
fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    serde_json::from_str(lines[0]).unwrap()
}

fn csv_rows(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn te3_sweep_has_negative_entropy_rows() {
    let out = run_config(
        "te3",
        r#"{"model": {"c": 0.3}, "sweep": {"T_min": 0.1, "T_max": 100, "points": 13}}"#,
        &[],
    );
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, "T,F,U,S");
    assert_eq!(rows.len(), 13);
    assert!(rows.iter().all(|r| r[1] < 0.0));
    assert!(rows.iter().any(|r| r[3] < 0.0));
}

#[test]
fn uncoupled_model_gives_zero_columns() {
    let out = run_config("tm3", r#"{"model": {"c": 0}, "sweep": {"points": 5}}"#, &[]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    for r in rows {
        assert_eq!(&r[1..], &[0.0, 0.0, 0.0]);
    }
}

#[test]
fn dipole_distance_sweep_scales_as_r_to_minus_seven() {
    let out = run_config(
        "dipole",
        r#"{"model": {}, "sweep": {"T": 1e-4, "r_min": 10, "r_max": 100, "points": 6}}"#,
        &[],
    );
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, "r,F");
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let slope = (last[1].abs() / first[1].abs()).ln() / (last[0] / first[0]).ln();
    assert!((slope + 7.0).abs() < 0.15, "slope {slope}");
}

#[test]
fn output_is_deterministic() {
    let text =
        r#"{"model": {"kind": "te_bath", "generator": {"n": 4, "k_max": 3, "lambda": 0.3}}, "sweep": {"points": 9}}"#;
    let a = run_config("bath", text, &[]);
    let b = run_config("bath", text, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_follows_schema() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.json", r#"{"model": {"c": 0.3}, "sweep": {"points": 9}}"#);
    let out_path = dir.path().join("out.json");
    let out = casimir(&[
        "te3",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["model"]["kind"], "te3");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for key in ["T", "F", "U", "S"] {
        assert!(rows[0][key].is_f64(), "{key}");
    }
    let intervals = doc["negative_entropy_intervals"].as_array().unwrap();
    assert!(!intervals.is_empty());
    let first = intervals[0].as_array().unwrap();
    assert!(first[0].as_f64().unwrap() < first[1].as_f64().unwrap());
}

#[test]
fn set_overrides_scalar_fields() {
    let out = run_config(
        "tm3",
        r#"{"model": {"c": 0.3}}"#,
        &[
            "--set",
            "sweep.points=3",
            "--set",
            "sweep.T_min=1",
            "--set",
            "sweep.T_max=2",
        ],
    );
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    let temps: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(temps.len(), 3);
    assert_eq!((temps[0], temps[2]), (1.0, 2.0));
}

#[test]
fn non_positive_t_min_is_a_schema_error() {
    let out = run_config("te3", r#"{"model": {"c": 0.3}, "sweep": {"T_min": 0}}"#, &[]);
    let rec = error_record(&out);
    assert_eq!(rec["error"], "config");
    assert_eq!(rec["parameter"], "sweep.T_min");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_bath_is_a_schema_error() {
    let out = run_config(
        "bath",
        r#"{"model": {"kind": "tm_bath", "generator": {"n": 0, "k_max": 3, "lambda": 0.3}}}"#,
        &[],
    );
    assert_eq!(error_record(&out)["parameter"], "model.generator.n");
}

#[test]
fn unknown_key_is_named() {
    let out = run_config("tm3", r#"{"model": {"c": 0.3, "d": 1}}"#, &[]);
    assert_eq!(error_record(&out)["parameter"], "model.d");
}

#[test]
fn unstable_model_names_the_coupling() {
    let out = run_config("tm3", r#"{"model": {"c": 0.8}}"#, &[]);
    let rec = error_record(&out);
    assert_eq!(rec["error"], "model");
    assert_eq!(rec["parameter"], "model.c");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergent_dipole_pair_names_the_separation() {
    let out = run_config(
        "dipole",
        r#"{"model": {"g1": 5, "g2": 5, "r": 0.5}, "sweep": {"points": 2}}"#,
        &[],
    );
    assert_eq!(error_record(&out)["parameter"], "model.r");
}

#[test]
fn exhausted_truncation_cap_names_the_tolerance() {
    let out = run_config(
        "tm3",
        r#"{"model": {"c": 0.3}, "sweep": {"T_min": 1e-4, "T_max": 1e-3, "points": 2}, "tolerances": {"n_max_cap": 64}}"#,
        &[],
    );
    let rec = error_record(&out);
    assert_eq!(rec["error"], "computation");
    assert_eq!(rec["parameter"], "tolerances.n_max_cap");
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = casimir(&["tm3", "--config", "/nonexistent/config.json"]);
    let rec = error_record(&out);
    assert_eq!(rec["error"], "io");
    assert!(Path::new(rec["parameter"].as_str().unwrap()).ends_with("config.json"));
}

#[test]
fn verify_reports_every_check_passing() {
    let out = casimir(&["verify", "--format", "json"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 11);
}
