//! Process-level tests of the binary: exit codes, diagnostics on standard
//! error, and config-file layering.

use std::path::PathBuf;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modelprobe"))
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("modelprobe-cli-{name}"))
}

#[test]
fn malformed_domain_files_exit_nonzero_with_positions() {
    let domain = temp_path("bad.pddl");
    std::fs::write(
        &domain,
        "(define (domain bad)\n  (:predicates (p) (q))\n  (:action a\n    :parameters ()\n    :effect (when (p) (q))))\n",
    )
    .unwrap();
    let output = binary()
        .args([
            "interrogate",
            "--domain",
            domain.to_str().unwrap(),
            "--problem",
            "unused.pddl",
            "--out",
            temp_path("bad-out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("5:14"), "diagnostic must carry line:column, got: {stderr}");
    assert!(stderr.contains("when"), "diagnostic must name the construct, got: {stderr}");
}

#[test]
fn successful_interrogation_exits_zero() {
    let out = temp_path("ok-out");
    let status = binary()
        .args([
            "interrogate",
            "--domain",
            "gripper",
            "--queries",
            "ap",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("learned.pddl").exists());
    assert!(out.join("summary.csv").exists());
    // The accuracy trace is non-decreasing: a tuple, once fixed, is final.
    let trace = std::fs::read_to_string(out.join("accuracy.csv")).unwrap();
    let mut last = 0.0f64;
    for line in trace.lines().skip(1) {
        let accuracy: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(accuracy >= last, "trace dipped: {line}");
        last = accuracy;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn budget_violations_exit_nonzero() {
    let out = temp_path("budget-out");
    let status = binary()
        .args([
            "interrogate",
            "--domain",
            "blocksworld",
            "--queries",
            "po",
            "--budget",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(!status.success());
}

#[test]
fn zero_horizon_is_rejected() {
    let out = temp_path("horizon-out");
    let output = binary()
        .args([
            "dcdn",
            "--domain",
            "drive",
            "--horizon",
            "0",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("horizon"), "got: {stderr}");
}

#[test]
fn empty_bench_suites_are_rejected() {
    let output = binary()
        .args(["bench", "--suite", "", "--out", temp_path("bench-out").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("suite"));
}

#[test]
fn config_files_supply_defaults_and_flags_override() {
    let config = temp_path("run.conf");
    std::fs::write(
        &config,
        "domain = drive\nqueries = ap\nseed = 3\nout = should-be-overridden\n",
    )
    .unwrap();
    let out = temp_path("config-out");
    let status = binary()
        .args([
            "interrogate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    // The flag's out directory was used, not the config file's.
    assert!(out.join("summary.csv").exists());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("drive,"));
}

#[test]
fn unknown_bundled_domains_are_reported() {
    let output = binary()
        .args([
            "interrogate",
            "--domain",
            "nonexistent",
            "--out",
            temp_path("missing-out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("nonexistent"));
}
