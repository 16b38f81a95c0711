use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn lqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqg")).args(args).output().unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = lqg(&["--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["kernel-residual", "gmc-mass", "lbm-revuz", "polyakov", "anomaly"] {
        assert!(text.contains(name), "{name} missing from --list");
    }
}

#[test]
fn passing_run_writes_json_and_csv() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = lqg(&["gmc-mass", "--gamma", "0", "-n", "50", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("gmc-mass.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["config"]["gamma"], 0.0);
    assert!(out_dir.join("gmc-mass.meta.json").exists());
    let csvs: Vec<_> = fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert!(!csvs.is_empty());
}

#[test]
fn failed_verdict_exits_2() {
    // far too few terms for the closed-form tolerance
    let out = lqg(&["kernel-residual", "--cutoff", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn flags_override_config() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "kind = \"gmc-mass\"\nseed = 3\nsamples = 40\ngamma = 0.5\n").unwrap();
    let out = lqg(&["gmc-mass", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["config"]["seed"], 9);
    assert_eq!(summary["config"]["samples"], 40);
}

#[test]
fn bad_input_exits_1_without_output() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "kind = \"gmc-mass\"\nsampels = 10\n").unwrap();
    let out_dir = dir.path().join("never");
    let out = lqg(&["gmc-mass", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());

    let out = lqg(&["gmc-mass", "--gamma", "3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());

    assert_eq!(lqg(&["no-such-experiment"]).status.code(), Some(1));
    assert_eq!(lqg(&[]).status.code(), Some(1));
}

#[test]
fn mismatched_config_kind_is_an_error() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "kind = \"polyakov\"\n").unwrap();
    let out = lqg(&["gmc-mass", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
