//! End-to-end tests of the binary: exit codes, report shape, and artifact
//! files for each subcommand, including the failure paths.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_charflow")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "charflow-cli-{name}-{}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &PathBuf, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout must be one JSON report")
}

#[test]
fn certify_default_grid_passes() {
    let dir = scratch("certify-pass");
    let out = run(&["certify", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["command"], "certify");
    assert!(report["tool"]["version"].is_string());
    assert!(dir.join("certify-report.json").is_file());
}

#[test]
fn certify_with_corrupted_cell_fails_and_names_identities() {
    let dir = scratch("certify-corrupt");
    let cfg = write_config(
        &dir,
        r#"{"theta": ["3/2", "-2/3"], "nu": [0, 1], "nu_prime": [0, 0],
            "corrupt": {"row": 0, "col": 1, "factor": "5/3"}}"#,
    );
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["pass"], serde_json::Value::Bool(false));
    let failing = report["result"]["failing"].as_array().unwrap();
    assert!(!failing.is_empty());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("failing identities"));
    assert!(stderr.contains("hirota-shift"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = scratch("badcfg");
    let cfg = write_config(&dir, r#"{"bogus": 1}"#);
    let out = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn involution_word_transport_returns_the_original_point() {
    let dir = scratch("involution");
    let cfg = write_config(
        &dir,
        r#"{"theta": ["3/2", "-2/3"], "nu": [0, 1], "nu_prime": [0, 0], "word": "r1,r1"}"#,
    );
    let out = run(&[
        "symmetry",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let with_word = stdout_json(&out);

    let cfg_id = write_config(
        &dir,
        r#"{"theta": ["3/2", "-2/3"], "nu": [0, 1], "nu_prime": [0, 0], "word": ""}"#,
    );
    let out_id = run(&[
        "symmetry",
        "--config",
        cfg_id.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out_id.status.code(), Some(0));
    let identity = stdout_json(&out_id);

    assert_eq!(
        with_word["result"]["state"], identity["result"]["state"],
        "an involution applied twice must reproduce the original coordinates"
    );
    assert_eq!(
        with_word["result"]["parameters_after"],
        identity["result"]["parameters_after"]
    );
}

#[test]
fn word_outside_its_domain_is_a_config_error() {
    let dir = scratch("phi-n2");
    let cfg = write_config(
        &dir,
        r#"{"theta": ["1/3", "-5/6", "1"], "nu": [0, 1], "nu_prime": [0, 0], "word": "phi"}"#,
    );
    let out = run(&["symmetry", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi"));
}

#[test]
fn relation_check_mode_passes() {
    let dir = scratch("relations");
    let cfg = write_config(&dir, r#"{"l": 2, "n": 1, "trials": 2}"#);
    let out = run(&[
        "symmetry",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 11);
    assert!(report["result"]["relations"].as_array().unwrap().len() > 5);
}

#[test]
fn zero_length_path_yields_single_row() {
    let dir = scratch("zero-path");
    let cfg = write_config(&dir, r#"{"path": {"waypoints": [[2.25]], "samples": 8}}"#);
    let out = run(&[
        "integrate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["diagnostics"]["samples"], 1);
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus exactly one sample");
}

#[test]
fn path_through_singular_locus_exits_four_with_last_state() {
    let dir = scratch("singular");
    let cfg = write_config(&dir, r#"{"path": {"waypoints": [[2.25], [0.9]], "samples": 8}}"#);
    let out = run(&[
        "integrate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let report = stdout_json(&out);
    let abort = &report["result"]["singular_abort"];
    assert!(abort["detail"].as_str().unwrap().contains("s1 = 1"));
    assert!(abort["last_sample"]["state"].is_array());
}

#[test]
fn explicit_parameter_lists_drive_the_comparisons() {
    let dir = scratch("explicit");
    let cfg = write_config(
        &dir,
        r#"{"theta": ["3/2", "-2/3"], "e": ["1/2", "0"], "kappa": ["11/12", "-1/12"]}"#,
    );
    for cmd in ["pvi-compare", "garnier-compare"] {
        let out = run(&[
            cmd,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{cmd} failed");
        let report = stdout_json(&out);
        assert_eq!(report["result"]["pass"], serde_json::Value::Bool(true));
    }
}

#[test]
fn lax_reports_scheme_and_accessory_count() {
    let dir = scratch("lax");
    let out = run(&["lax", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["accessory_parameters"], 2);
    assert_eq!(report["result"]["exponent_sum"], "0");
    assert!(dir.join("lax.json").is_file());

    let out_float = run(&["lax", "--mode", "float", "--out", dir.to_str().unwrap()]);
    assert_eq!(out_float.status.code(), Some(0));
}

#[test]
fn float_mode_rejected_where_only_exact_applies() {
    let out = run(&["certify", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(2));
}
