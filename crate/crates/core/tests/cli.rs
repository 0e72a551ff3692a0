use std::process::{Command, Output};

use serde_json::Value;

fn sumgauss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumgauss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn bounds_binary_depth_two() {
    let v = stdout_json(&sumgauss(&["bounds", "--base", "2", "--depth", "2"]));
    let e: Vec<f64> = serde_json::from_value(v["endpoints"].clone()).unwrap();
    assert_eq!(e.len(), 5);
    assert_eq!(e[4], std::f64::consts::SQRT_2);
    assert_eq!(v["intervals"][0]["n"], 1);
}

#[test]
fn bounds_csv_uses_dot_decimal() {
    let out = sumgauss(&["bounds", "--base", "3", "--depth", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,k_min,k_max");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,1,1.035"));
}

#[test]
fn eval_inline_at_zero() {
    let v = stdout_json(&sumgauss(&["eval", "--params", "k=1.116", "--t", "0"]));
    assert_eq!(v[0]["p_approx"].as_f64(), Some(0.0));
}

#[test]
fn eval_exact_range() {
    let v = stdout_json(&sumgauss(&["eval", "--exact", "--t", "0..1:0.25"]));
    assert_eq!(v.as_array().unwrap().len(), 5);
    let p1 = v[4]["p_exact"].as_f64().unwrap();
    assert!((p1 - 0.682_689_492_137_085_9).abs() < 1e-15);
}

#[test]
fn table_matches_first_row_of_binary_convergence() {
    let out = sumgauss(&["table", "--base", "2", "--p-range", "11..15"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 11.0);
    assert!((rows[0][2] - 4.2e-5).abs() < 1e-6);
}

#[test]
fn continuum_json() {
    let v = stdout_json(&sumgauss(&["continuum", "--t", "1", "--series", "12"]));
    let a = v["integral"].as_f64().unwrap();
    let b = v["p_exact_sq"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-10);
    assert_eq!(v["series"]["informative"], true);
}

#[test]
fn compare_has_all_columns() {
    let v = stdout_json(&sumgauss(&["compare", "--params", "k=1.01,1.23345", "--t-max", "1"]));
    let row = &v[1];
    for key in [
        "t", "p_exact", "leading_1116", "envelope_lower", "envelope_upper",
        "shenton_lower", "shenton_upper", "params",
    ] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(sumgauss(&["bounds", "--base", "2", "--depth", "1", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(sumgauss(&["nope"]).status.code(), Some(2));
    assert_eq!(sumgauss(&["eval", "--t", "1"]).status.code(), Some(2));
    assert_eq!(sumgauss(&["bounds", "--base", "5", "--depth", "1"]).status.code(), Some(1));
    assert_eq!(sumgauss(&["eval", "--params", "k=1.116", "--t=-1"]).status.code(), Some(1));
    assert_eq!(sumgauss(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_param_file_is_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"version": 1, "k": [1.1], "weights": [1.0]}"#).unwrap();
    let out = sumgauss(&["scan", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("malformed parameter file"), "{err}");
}

#[test]
fn fit_then_scan_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.json");
    let out = sumgauss(&[
        "fit", "--base", "2", "--depth", "1", "--iters", "300", "--refine-iters", "500", "--seed", "3",
    ]);
    let fit = stdout_json(&out);
    std::fs::write(&path, &out.stdout).unwrap();
    let scan = stdout_json(&sumgauss(&["scan", "--params", path.to_str().unwrap()]));
    assert_eq!(fit["report"], scan);
    assert_eq!(
        fit["report"]["max_abs_dev"].as_f64().unwrap().to_bits(),
        scan["max_abs_dev"].as_f64().unwrap().to_bits()
    );
}

#[test]
fn fit_independent_of_thread_count() {
    let args = ["fit", "--base", "2", "--depth", "2", "--iters", "1000", "--refine-iters", "1000", "--seed", "9"];
    let one = sumgauss(&[&["--threads", "1"], &args[..]].concat());
    let four = sumgauss(&[&["--threads", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn fit_nodes_half_step() {
    let v = stdout_json(&sumgauss(&[
        "fit", "--table", "half-step", "--weights", "0.5,0.25,0.25", "--method", "nodes",
        "--nodes", "1,1.4142135623730951,2",
    ]));
    let k: Vec<f64> = serde_json::from_value(v["k"].clone()).unwrap();
    assert!((k[2] - 1.31336).abs() < 1e-3);
    assert_eq!(v["meta"]["method"], "nodes");
}

#[test]
fn bench_small_run_warns() {
    let out = sumgauss(&["bench", "--params", "k=1.116", "--n", "1e3"]);
    let v = stdout_json(&out);
    assert_eq!(v["unstable"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(sumgauss(&["bench", "--params", "k=1.116", "--n", "0"]).status.code(), Some(1));
}
