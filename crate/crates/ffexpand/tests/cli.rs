//! End-to-end checks of the binary: exit codes, report envelopes, config
//! merging, and output files.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffexpand")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn niceness_verdicts_drive_exit_codes() {
    let nice = run(&["check-nice", "--field", "5", "--poly", "2*z^2+(x+y)*z+x*y"]);
    assert_eq!(nice.status.code(), Some(0));
    let report = json(&nice);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["command"], "check-nice");
    assert_eq!(report["result"]["verdict"]["status"], "nice");

    let not_nice = run(&["check-nice", "--field", "5", "--poly", "x^2+y^2+z^2"]);
    assert_eq!(not_nice.status.code(), Some(1));
    assert_eq!(json(&not_nice)["result"]["verdict"]["status"], "not_nice");
}

#[test]
fn unknown_search_outcome_exits_two() {
    let out = run(&[
        "annihilator",
        "--field",
        "5",
        "--polys",
        "x^2; y^2; (x+y)^2",
        "--bound",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["family"]["status"]["kind"], "unknown");

    let found = run(&["annihilator", "--field", "5", "--polys", "x^2; y^2; (x+y)^2"]);
    assert_eq!(found.status.code(), Some(0));
    assert_eq!(json(&found)["result"]["family"]["status"]["kind"], "dependent");
}

#[test]
fn usage_domain_and_cap_errors_have_distinct_codes() {
    assert_eq!(run(&["check-nice", "--field", "4^1", "--poly", "x+y"]).status.code(), Some(64));
    assert_eq!(run(&["check-nice", "--field", "5"]).status.code(), Some(64));
    assert_eq!(run(&["nosuchcommand"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let degree_too_big = run(&["incidence", "--field", "7", "--degree", "7", "--trials", "1"]);
    assert_eq!(degree_too_big.status.code(), Some(65));

    let cap = run(&["classify-quadratic", "--field", "5", "--exhaustive"]);
    assert_eq!(cap.status.code(), Some(66));
}

#[test]
fn incidence_example_satisfies_every_trial() {
    let out = run(&[
        "incidence", "--field", "7", "--degree", "2", "--points", "20", "--curves", "20",
        "--trials", "100", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["satisfied"], 100);
    assert_eq!(report["result"]["all_satisfied"], true);
}

#[test]
fn counterexample_example_reports_the_ceiling() {
    let out = run(&["counterexample", "--prime", "101", "--coeffs", "1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["image_size"], 71);
    assert_eq!(report["result"]["ceiling"], 75);
    assert_eq!(report["result"]["within_ceiling"], true);
    assert_eq!(report["result"]["set_sizes"], serde_json::json!([32, 32, 32]));
}

#[test]
fn exhaustive_scan_reports_agreement() {
    let out = run(&["classify-quadratic", "--field", "3", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["quadratics"], 19656);
    assert_eq!(report["result"]["agreement"], true);
    assert_eq!(report["result"]["search_inconclusive"], 0);
}

#[test]
fn config_file_supplies_flags_and_the_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"field": "13", "poly": "x*y+z", "seed": 9}"#).unwrap();
    let cfg = path.to_str().unwrap();

    let from_config = run(&["check-nice", "--config", cfg]);
    assert_eq!(from_config.status.code(), Some(0));
    let report = json(&from_config);
    assert_eq!(report["config"]["field"], "13");
    assert_eq!(report["config"]["seed"], 9);

    let overridden = run(&["check-nice", "--config", cfg, "--field", "7", "--seed", "4"]);
    let report = json(&overridden);
    assert_eq!(report["config"]["field"], "7");
    assert_eq!(report["config"]["seed"], 4);

    let missing = run(&["check-nice", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(74));
}

#[test]
fn output_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "expand", "--field", "11", "--poly", "x+y", "--sets", "random:4", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["result"]["measurement"]["set_sizes"], serde_json::json!([4, 4]));
}

#[test]
fn csv_format_prints_header_and_one_row() {
    let out = run(&["expand", "--field", "13", "--poly", "x*y", "--sets", "full", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("command,field,"));
    assert!(lines[1].starts_with("expand,13,"));
}

#[test]
fn conc_family_warns_without_blocking_on_dependent_parts() {
    let out = run(&[
        "conc-family", "--field", "11", "--degree", "3", "--f", "y", "--g", "y^2", "--sets",
        "random:5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["independence_certified"], false);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("warning"));
}

#[test]
fn interval_sets_require_prime_fields() {
    let out = run(&["expand", "--field", "3^2", "--poly", "x+y", "--sets", "interval:3"]);
    assert_eq!(out.status.code(), Some(65));
}
