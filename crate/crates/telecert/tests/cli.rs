//! Black-box tests of the command-line interface: exit codes, output
//! formats, and a fit round-trip through emitted datasets.

use std::path::PathBuf;
use std::process::{Command, Output};

fn telecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telecert"))
        .args(args)
        .env("TELECERT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("telecert-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn missing_input_file_is_an_io_error() {
    let out = telecert(&["fit", "/nonexistent/telecert-input.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_is_a_validation_error() {
    let dir = tmp_dir("malformed");
    let path = dir.join("bad.csv");
    std::fs::write(&path, "gamma,w_min\n0.5,not-a-number\n").unwrap();
    let out = telecert(&["fit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_of_range_parameter_is_a_validation_error() {
    let out = telecert(&["scan-min", "--V", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = telecert(&["scan-witness", "--gamma-grid", "0:2:5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_outputs_have_expected_shape() {
    let out = telecert(&["scan-fidelity", "--gamma-grid", "0:1:5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("gamma,"));
    assert_eq!(lines.count(), 5);

    let out = telecert(&["scan-fidelity", "--gamma-grid", "0:1:5", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tmp_dir("outflag");
    let path = dir.join("scan.csv");
    let args = ["scan-min", "--gamma-grid", "0:1:5", "--V", "0.9"];
    let stdout_run = telecert(&args);
    assert!(stdout_run.status.success());
    let mut file_args: Vec<&str> = args.to_vec();
    file_args.extend(["--out", path.to_str().unwrap()]);
    assert!(telecert(&file_args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), stdout_run.stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_round_trips_a_min_scan() {
    // emit model minima for known (V, delta), refit, and compare
    let dir = tmp_dir("roundtrip");
    let scan = telecert(&[
        "scan-min",
        "--gamma-grid",
        "0.1:0.9:9",
        "--V",
        "0.925",
        "--delta",
        "0.872",
    ]);
    assert!(scan.status.success());
    let mut csv = String::from("gamma,w_min\n");
    for line in String::from_utf8(scan.stdout).unwrap().lines().skip(1) {
        let mut cols = line.split(',');
        let gamma = cols.next().unwrap();
        let w_min = cols.next().unwrap();
        csv.push_str(&format!("{gamma},{w_min}\n"));
    }
    let input = dir.join("minima.csv");
    std::fs::write(&input, csv).unwrap();

    let fit = telecert(&["fit", input.to_str().unwrap(), "--format", "json"]);
    assert!(fit.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!((doc["v_hat"].as_f64().unwrap() - 0.925).abs() < 1e-5);
    assert!((doc["delta_hat"].as_f64().unwrap() - 0.872).abs() < 1e-5);
    assert_eq!(doc["converged"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_resolves_gamma_from_alpha_or_grid() {
    let ok = telecert(&["simulate", "--alpha-deg", "45", "--shots", "100"]);
    assert!(ok.status.success());
    let text = String::from_utf8(ok.stdout.clone()).unwrap();
    assert!(text.starts_with("input,bsm_outcome,basis,result,count"));

    // an explicit alpha wins over the gamma grid
    let both = telecert(&[
        "simulate",
        "--alpha-deg",
        "45",
        "--gamma-grid",
        "0.5",
        "--shots",
        "100",
    ]);
    assert!(both.status.success());
    assert_eq!(both.stdout, ok.stdout);

    let neither = telecert(&["simulate", "--shots", "100"]);
    assert_eq!(neither.status.code(), Some(2));
}

#[test]
fn ent_threshold_reports_the_noisy_family() {
    let out = telecert(&["ent-threshold", "--V", "0.925", "--delta", "0.872", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = doc["gamma_ent_threshold"].as_f64().unwrap();
    assert!(g > 0.0 && g < 1.0);
    assert_eq!(doc["always_entangled"], false);

    // the ideal channel is entangled for every positive gamma
    let out = telecert(&["ent-threshold", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["gamma_ent_threshold"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["always_entangled"], true);
}
