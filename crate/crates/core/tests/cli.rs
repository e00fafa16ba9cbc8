//! End-to-end runs of the `fusionq` binary.

use std::process::Command;

use fusionq::suite::oracle_dims;
use fusionq::QContext;

fn fusionq(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fusionq")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn alcove_lists_the_two_weights_at_level_three() {
    let (code, out) = fusionq(&["alcove", "--n", "2", "--ell", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("alcove (N=2, ell=3): 2 weights"));
    assert!(out.contains("[0]\t0\t[0]\t1") && out.contains("[1]\t1\t[1]\t2"));
}

#[test]
fn full_run_writes_a_passing_json_and_tsv_report() {
    let dir = std::env::temp_dir().join(format!("fusionq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (json, tsv) = (dir.join("out.json"), dir.join("out.tsv"));
    let (code, _) = fusionq(&[
        "all",
        "--n",
        "2",
        "--ell",
        "4",
        "--json",
        json.to_str().unwrap(),
        "--tsv",
        tsv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] != "fail"));
    for key in ["id", "status", "max_residual", "coverage", "ms"] {
        assert!(checks[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(v["config"]["seed"], 0);
    let rows = std::fs::read_to_string(&tsv).unwrap().lines().count();
    assert_eq!(rows, checks.len() + 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn levels_match_the_weight_oracle() {
    let (code, out) = fusionq(&["levels", "--n", "3", "--ell", "5", "--max-power", "8"]);
    assert_eq!(code, 0);
    let oracle = oracle_dims(&QContext::new(3, 5).unwrap(), 8);
    assert!(out.contains(&format!("level dims: {oracle:?}")));
    assert!(out.lines().filter(|l| l.starts_with("PASS  level-multiplicities@")).count() == 9);
}

#[test]
fn usage_and_configuration_errors_exit_with_two() {
    assert_eq!(fusionq(&["alcove", "--n", "1", "--ell", "3"]).0, 2);
    assert_eq!(fusionq(&["alcove", "--n", "3", "--ell", "3"]).0, 2);
    assert_eq!(fusionq(&["nonsense"]).0, 2);
    assert_eq!(fusionq(&["levels", "--n", "2"]).0, 2);
}

#[test]
fn failing_checks_exit_with_one() {
    // a tolerance no residual can meet turns numeric checks into failures
    let (code, out) = fusionq(&["levels", "--n", "2", "--ell", "4", "--tol", "1e-300"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
}
