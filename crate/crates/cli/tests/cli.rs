use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tap_core::fixtures::{DANGEROUS_GADGET, FIXTURE_1, FIXTURE_2};

fn tap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tap")).args(args).output().unwrap()
}

fn tap_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tap"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_instance(dir: &Path, text: &str) -> String {
    let path = dir.join("instance.tap");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic_and_parses_back() {
    let args = ["gen", "--n", "9", "--seed", "5", "--mode", "caterpillar"];
    let a = tap(&args);
    let b = tap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let solved = tap_stdin(&["solve", "-"], &stdout(&a));
    assert!(solved.status.success(), "{}", String::from_utf8_lossy(&solved.stderr));
}

#[test]
fn solve_fixture_json() {
    let out = tap_stdin(&["--json", "solve", "-", "--audit"], FIXTURE_2);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["size"], 2);
    assert_eq!(v["rho"], "7/4");
    assert_eq!(v["links"], serde_json::json!([[0, 2], [2, 3]]));
    assert_eq!(v["audit"]["failures"], serde_json::json!([]));
}

#[test]
fn solve_writes_trace_and_dot() {
    let dir = scratch("trace_and_dot");
    let input = write_instance(&dir, DANGEROUS_GADGET);
    let trace = dir.join("trace.jsonl");
    let dots = dir.join("dots");
    let out = tap(&[
        "--emit-dot",
        dots.to_str().unwrap(),
        "solve",
        &input,
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lines: Vec<Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.iter().any(|l| l["kind"] == "find-tree"));
    let snapshots = std::fs::read_dir(&dots).unwrap().count();
    assert_eq!(snapshots, lines.len() + 1);
    let first = std::fs::read_to_string(dots.join("step_000.dot")).unwrap();
    assert!(first.starts_with("graph tap {"));
}

#[test]
fn rho_below_three_halves_is_bad_input() {
    let out = tap_stdin(&["--rho", "7/5", "solve", "-"], FIXTURE_1);
    assert_eq!(out.status.code(), Some(2));
    let out = tap_stdin(&["--rho", "3/2", "solve", "-"], FIXTURE_1);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_input_is_bad_input() {
    assert_eq!(tap_stdin(&["solve", "-"], "tap 1\nnodes x\n").status.code(), Some(2));
    assert_eq!(tap(&["solve", "/nonexistent/instance.tap"]).status.code(), Some(2));
    assert_eq!(tap(&["frobnicate"]).status.code(), Some(2));
    let infeasible = "tap 1\nnodes 3\nroot 0\nedge 0 1\nedge 1 2\n";
    assert_eq!(tap_stdin(&["solve", "-"], infeasible).status.code(), Some(2));
}

#[test]
fn bound_prints_tau_cut_and_x() {
    let out = tap_stdin(&["--json", "bound", "-"], FIXTURE_2);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["tau"], "2");
    assert!(v["cut"].is_string());
    assert!(v["x"].is_object());
    let text = tap_stdin(&["bound", "-", "--lp-format", "text"], FIXTURE_2);
    assert!(text.status.success());
    assert!(stdout(&text).lines().all(|l| l.contains('=')));
    assert_eq!(tap_stdin(&["bound", "-", "--lp-format", "mps"], FIXTURE_2).status.code(), Some(2));
}

#[test]
fn exact_reports_opt_and_witness() {
    let out = tap_stdin(&["--json", "exact", "-"], DANGEROUS_GADGET);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["opt"], 3);
    assert_eq!(v["witness"].as_array().unwrap().len(), 3);
}

#[test]
fn leafcover_and_audit() {
    let out = tap_stdin(&["--json", "leafcover", "-"], FIXTURE_2);
    assert!(out.status.success());
    assert!(json(&out)["weight"].is_string());
    let out = tap_stdin(&["audit", "-"], DANGEROUS_GADGET);
    assert!(out.status.success());
    assert!(stdout(&out).contains("audit passed"));
}

#[test]
fn stress_json_schema() {
    let out = tap(&["--json", "stress", "--count", "12", "--seed", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["failures", "instances", "max_ratio_opt", "max_ratio_tau"]);
    assert_eq!(v["instances"], 12);
    assert!(v["max_ratio_tau"].is_string());
    assert_eq!(tap(&["--json", "stress", "--count", "12", "--seed", "4"]).stdout, out.stdout);
}
