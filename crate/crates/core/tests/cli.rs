//! End-to-end runs of the `boxgap` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn boxgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxgap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eval_flat_indicator() {
    let out = boxgap(&["eval", "--weights", "1", "--grid", "0:1:0.1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let values: Vec<(f64, f64)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(values.len(), 11);
    assert!(values.iter().filter(|(x, _)| *x < 1.0).all(|&(_, v)| v == 1.0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("tolerance"));
}

#[test]
fn eval_at_center() {
    let out = boxgap(&["eval", "--equal", "3", "--at", "center"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let got = v["values"][0].as_f64().unwrap();
    assert!((got - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12);
    assert_eq!(v["method"], "truncated_power");
}

#[test]
fn eval_fourier_plateau() {
    let out = boxgap(&["eval", "--weights", "0.6,0.8", "--method", "fourier", "--at", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["values"][0].as_f64().unwrap() - 1.25).abs() < 1e-6);
}

#[test]
fn gap_exit_codes() {
    for (args, want) in [
        (vec!["gap", "--equal", "4"], 0.0),
        (vec!["gap", "--weights", "0.6,0.8"], 0.0),
        (vec!["gap", "--equal", "3"], 0.125),
    ] {
        let out = boxgap(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let v = json(&out);
        assert!((v["report"]["gap"].as_f64().unwrap() - want).abs() < 1e-12);
        assert_eq!(v["holds"], true);
    }
}

#[test]
fn errors_exit_two() {
    assert_eq!(boxgap(&["gap", "--weights", "1,-2"]).status.code(), Some(2));
    assert_eq!(boxgap(&["eval", "--equal", "30", "--method", "truncated_power"]).status.code(), Some(2));
    assert_eq!(boxgap(&["gap", "--equal", "3", "--method", "nope"]).status.code(), Some(2));
    assert_eq!(boxgap(&["gap", "--equal", "3", "--weights", "1"]).status.code(), Some(2));
    assert_eq!(boxgap(&["fbound", "--s", "0"]).status.code(), Some(2));
    assert_eq!(boxgap(&["gap", "--equal", "3", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(boxgap(&["--help"]).status.code(), Some(0));
}

#[test]
fn fbound_limit() {
    let out = boxgap(&["fbound", "--s", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let got = json(&out)[0]["value"].as_f64().unwrap();
    assert!((got - (2.0 / std::f64::consts::PI).sqrt()).abs() <= 5e-3);
}

#[test]
fn probe_equal_family() {
    let out = boxgap(&["probe", "--c0", "1", "--family", "equal", "--n", "1..64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r["min_gap"].as_f64().unwrap() >= -1e-9));
}

#[test]
fn converge_decreases() {
    let out = boxgap(&["converge", "--family", "equal", "--n", "8,16,32"]);
    assert_eq!(out.status.code(), Some(0));
    let d: Vec<f64> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["sup_distance"].as_f64().unwrap())
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2]);
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..3)
        .map(|k| dir.path().join(format!("scan{k}.json")).to_string_lossy().into_owned())
        .collect();
    for (path, threads) in paths.iter().zip(["1", "1", "4"]) {
        let out = boxgap(&[
            "scan", "--n", "6", "--c0", "3", "--trials", "200", "--seed", "5", "--threads", threads, "--out", path,
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let first = std::fs::read(&paths[0]).unwrap();
    assert!(!first.is_empty());
    for p in &paths[1..] {
        assert_eq!(std::fs::read(p).unwrap(), first);
    }
}

#[test]
fn seventeen_significant_digits() {
    let out = boxgap(&["phi", "--equal", "2", "--r", "0,0.1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1.4142135623730951e0"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["values"][0].as_f64().unwrap(), 2f64.sqrt());
}

#[test]
fn remaining_subcommands_run() {
    let out = boxgap(&["expect", "--weights", "0.6,0.8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["expectation"].as_f64().unwrap() - 0.8).abs() < 1e-15);
    assert!(v["bounds"]["weighted_sum"].as_f64().unwrap() <= 0.8);

    let out = boxgap(&["expect", "--equal", "30", "--method", "monte_carlo", "--samples", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["stderr"].as_f64().is_some());

    let out = boxgap(&["minimize", "--n", "3", "--c0", "4", "--start", "2,1,2", "--budget", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["best"]["gap"].as_f64().unwrap() <= v["initial"]["gap"].as_f64().unwrap());

    let out = boxgap(&["gap", "--random", "5,2,9", "--method", "fourier", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("n,phi0"));
}
