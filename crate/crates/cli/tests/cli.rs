use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn mrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrl")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_accepts_the_golden_corpus() {
    for name in ["mrl.mrl", "mrl3.mrl", "lmrl.mrl", "mrl_filter.mrl", "mpcut3.mrl"] {
        let out = mrl(&["check", path_str(&corpus(name))]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(!stdout(&out).contains("rejected"));
    }
}

#[test]
fn check_rejects_mutants_with_exit_one() {
    for name in ["mrl.mrl", "lmrl.mrl", "filter.mrl"] {
        let out = mrl(&["check", path_str(&corpus("mutants").join(name))]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        assert!(!stdout(&out).contains(": accepted"), "{name}: {}", stdout(&out));
    }
}

#[test]
fn check_json_reports_path_and_reason() {
    let out = mrl(&["--json", "check", path_str(&corpus("mutants/lmrl.mrl"))]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    let linear = reports
        .as_array()
        .expect("array")
        .iter()
        .find(|r| r["name"] == "linear-contraction")
        .expect("linear-contraction reported");
    assert_eq!(linear["status"], "rejected");
    assert_eq!(linear["node_path"], serde_json::json!([]));
    assert!(linear["reason"].to_string().contains("RuleNotInCalculus"), "{linear}");
}

#[test]
fn parse_errors_and_usage_errors_exit_two() {
    let dir = TempDir::new().expect("tempdir");
    let bad = dir.path().join("bad.mrl");
    std::fs::write(&bad, "(session 2 mrl)\n(def x (d (seq) (rule id [0]))").expect("write");
    let out = mrl(&["check", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.mrl:"));
    assert_eq!(mrl(&["check", "/nonexistent/file.mrl"]).status.code(), Some(2));
    assert_eq!(mrl(&["eliminate", "--op", "no_such_rule", path_str(&corpus("mrl.mrl"))]).status.code(), Some(2));
    assert_eq!(mrl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn eliminate_three_party_cut_writes_a_checked_derivation() {
    let dir = TempDir::new().expect("tempdir");
    let result = dir.path().join("out.mrl");
    let out = mrl(&["eliminate", "--op", "mp_cut", "--at", "0,0,0", "-o", path_str(&result), path_str(&corpus("mpcut3.mrl"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(&result).expect("output written");
    assert!(written.starts_with("(session 3 mrl)"));
    assert!(written.contains("(def result"));
    let checked = mrl(&["check", path_str(&result)]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(stdout(&checked).trim(), "result: accepted");
}

#[test]
fn eliminate_json_reports_the_conclusion() {
    let out = mrl(&[
        "--json",
        "eliminate",
        "--op",
        "mp_cut",
        "--input",
        "left,middle,right",
        "--at",
        "0,0,0",
        path_str(&corpus("mpcut3.mrl")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(report["status"], "ok");
    assert_eq!(report["conclusion"], "(seq (ifm [0] (atom a)) (ifm [1] (atom a)) (ifm [2] (atom a)))");
}

#[test]
fn eliminate_refuses_non_partitioning_roles() {
    let out = mrl(&["eliminate", "--op", "mp_cut", "--input", "left,middle", "--at", "0,0", path_str(&corpus("mpcut3.mrl"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn search_finds_or_refutes() {
    let file = corpus("mpcut3.mrl");
    let found = mrl(&["search", "--goal", "spread", path_str(&file)]);
    assert_eq!(found.status.code(), Some(0));
    assert!(stdout(&found).contains("(rule id [0,1,2])"));
    let missing = mrl(&["search", "--goal", "lonely", path_str(&file)]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stdout(&missing).starts_with("not derivable"));
}

#[test]
fn selftest_smallest_space_passes() {
    let out = mrl(&["selftest", "--universe", "2", "--measure", "0", "--mode", "lmrl"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("zero failures"));
}

#[test]
fn fmt_is_idempotent() {
    let dir = TempDir::new().expect("tempdir");
    let once = mrl(&["fmt", path_str(&corpus("lmrl.mrl"))]);
    assert_eq!(once.status.code(), Some(0));
    let copy = dir.path().join("once.mrl");
    std::fs::write(&copy, &once.stdout).expect("write");
    let twice = mrl(&["fmt", path_str(&copy)]);
    assert_eq!(stdout(&once), stdout(&twice));
}

#[test]
fn max_depth_variable_limits_input_height() {
    let file = corpus("mrl.mrl");
    let limited = Command::new(env!("CARGO_BIN_EXE_mrl"))
        .env("MRL_MAX_DEPTH", "1")
        .args(["check", path_str(&file)])
        .output()
        .expect("binary runs");
    assert_eq!(limited.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&limited.stderr).contains("MRL_MAX_DEPTH"));
}
