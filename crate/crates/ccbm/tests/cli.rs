//! End-to-end checks of the installed binary: exit codes, artifacts, output.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ccbm"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ccbm_cli_{}_{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn validate_passes() {
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn run_writes_artifacts() {
    let dir = scratch("run");
    let out = bin()
        .args(["run", "--scenario", "example2d1", "--h", "0.25", "--max-iters", "2"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let history = fs::read_to_string(dir.join("history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(lines.next().unwrap(), "k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms");
    assert!(history.lines().count() >= 2);
    assert!(dir.join("trace_final.txt").exists());
    assert!(dir.join("mesh_final.txt").exists());
    let reason = fs::read_to_string(dir.join("stop_reason.txt")).unwrap();
    assert!(!reason.trim().is_empty());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn sweep_writes_summary() {
    let dir = scratch("sweep");
    let out = bin()
        .args([
            "sweep",
            "--scenario",
            "example2d1",
            "--hs",
            "0.25",
            "--mus",
            "2.0",
            "--methods",
            "ccbm",
            "--max-iters",
            "2",
        ])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "lambda,mu,h,method,final_J,final_dH,iters,cpu_ms");
    assert_eq!(summary.lines().count(), 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn mesh_subcommand_reports_quality() {
    let out = bin().args(["mesh", "--scenario", "example2d2", "--h", "0.2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("vertices"), "got: {text}");
}

#[test]
fn unknown_scenario_exits_2_with_hint() {
    let out = bin().args(["run", "--scenario", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("known scenarios"), "stderr: {err}");
    assert!(err.contains("example2d1"));
}

#[test]
fn bad_flag_exits_1() {
    let out = bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_lambda_accepted() {
    let out = bin()
        .args(["run", "--scenario", "example2d1", "--h", "0.25", "--max-iters", "1"])
        .args(["--lambda", "-3.5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
