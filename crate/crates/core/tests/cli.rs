//! End-to-end runs of the command-line tool.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fmuxnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmuxnet")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_shared_channel() {
    let g = fixture("triangle.json");
    let s = fixture("shared_channel.json");
    let out = fmuxnet(&["analyze", "--graph", g.to_str().unwrap(), "--schedules", s.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["delta_star"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((v["lambda_star"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let total: f64 = v["packing"].as_array().unwrap().iter().map(|p| p["weight"].as_f64().unwrap()).sum();
    assert!((total - 0.5).abs() < 1e-9);

    let wired = fmuxnet(&["analyze", "--graph", g.to_str().unwrap(), "--bits", "--function", "max"]);
    let v = json(&wired);
    assert_eq!(v["delta_star"].as_f64(), Some(1.0));
    assert_eq!(v["lambda_star"].as_f64(), Some(0.25));
}

#[test]
fn simulate_requires_seed() {
    let g = fixture("triangle.json");
    let out = fmuxnet(&["simulate", "--model", "wireline", "--graph", g.to_str().unwrap(), "--lambda", "0.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn simulate_is_reproducible() {
    let g = fixture("triangle.json");
    let s = fixture("shared_channel.json");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = fmuxnet(&[
            "simulate", "--model", "wireless", "--graph", g.to_str().unwrap(), "--schedules", s.to_str().unwrap(),
            "--trees", "all", "--policy", "greedy-maxweight", "--lambda", "0.4", "--function", "kth", "--seed", "9",
            "--horizon", "3000", "--out", csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(csv).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("slot,total_useful,total_nonuseful,V,completed,mean_latency,load_tree_0"));
}

#[test]
fn simulate_wireline_summary() {
    let g = fixture("triangle.json");
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let out = fmuxnet(&[
        "simulate", "--model", "wireline", "--graph", g.to_str().unwrap(), "--lambda", "0.5", "--seed", "1",
        "--horizon", "500", "--function", "max", "--summary", summary.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("time,rounds_in_flight,completed,mean_latency"));
    assert_eq!(csv.lines().count(), 501);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(v["oracle_checks"], v["completed"]);
    assert_eq!(v["policy"], "random-useful");
}

#[test]
fn sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"graph": {"kind": "line", "n": 3, "capacity": 1.0}, "model": "wireless",
            "policy": {"kind": "single_tree"}, "lambdas": [0.5, 1.5], "seeds": [1, 2, 3],
            "horizon": 2000, "detector": {"window": 100}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = fmuxnet(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["lambda_hat"].as_f64(), Some(0.5));
    assert_eq!(v["lambdas"][1]["verdict"], "unstable");
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("wireless_single-tree_lambda1.5_seed3.csv").exists());
}

#[test]
fn verify_exit_code_follows_report() {
    for suite in ["flows", "fmux", "wireless", "wireline"] {
        let out = fmuxnet(&["verify", "--suite", suite]);
        let v = json(&out);
        assert_eq!(out.status.success(), v["passed"].as_bool().unwrap(), "suite {suite}");
        assert!(!v["checks"].as_array().unwrap().is_empty());
    }
    assert!(fmuxnet(&["verify", "--suite", "fmux"]).status.success());
}
