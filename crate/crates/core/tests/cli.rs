use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divbarrier"))
        .args(args)
        .env_remove("DIVBARRIER_SEED")
        .output()
        .unwrap()
}

fn outputs(out: &Output) -> Value {
    serde_json::from_slice::<Value>(&out.stdout).unwrap()["outputs"].clone()
}

#[test]
fn value_at_threshold_is_ten() {
    let t = run(&["threshold", "--mu", "1", "--sigma", "1", "--r", "0.1"]);
    let a = outputs(&t)["a"].as_f64().unwrap().to_string();
    let v = run(&["value", "--x", &a, "--mu", "1", "--sigma", "1", "--r", "0.1"]);
    assert_eq!(v.status.code(), Some(0));
    assert!((outputs(&v)["value"].as_f64().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["threshold", "--mu", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--x", "1", "--mu", "1", "--paths", "0"]).status.code(), Some(2));
    assert_eq!(run(&["value", "--x", "abc", "--mu", "1"]).status.code(), Some(2));
    assert_eq!(run(&["value-hat", "--x", "1", "--mu", "1", "--mu-star", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["sweep", "--n", "3", "--out", "/nonexistent/dir/out.csv"]).status.code(),
        Some(4)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn validation_message_names_the_flag() {
    let out = run(&["value", "--x", "-1", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('x'));
    let out = run(&["curve", "--mu", "1", "--mu-star", "2", "--x-max", "inf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--x-max"));
}

#[test]
fn sweep_single_record_and_stable_hash() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.csv");
    let out = run(&["sweep", "--n", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 2);

    let hash = |seed: &str| {
        run(&["sweep", "--n", "50", "--seed", seed, "--out", p.to_str().unwrap()]);
        Sha256::digest(std::fs::read(&p).unwrap())
    };
    assert_eq!(hash("9"), hash("9"));
    assert_ne!(hash("9"), hash("10"));
}

#[test]
fn seed_env_sets_default_seed() {
    let base = ["simulate", "--x", "1", "--mu", "1", "--paths", "50", "--dt", "1e-2"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_divbarrier"))
        .args(base)
        .env("DIVBARRIER_SEED", "77")
        .output()
        .unwrap();
    let explicit = run(&[&base[..], &["--seed", "77"]].concat());
    assert_eq!(with_env.stdout, explicit.stdout);
    assert_ne!(run(&base).stdout, explicit.stdout);
}

#[test]
fn simulate_agrees_with_closed_form() {
    let out = run(&["simulate", "--x", "1", "--mu", "0.5", "--paths", "4000", "--dt", "1e-3", "--seed", "2"]);
    let o = outputs(&out);
    let (mean, se, exact) = (
        o["mean"].as_f64().unwrap(),
        o["std_error"].as_f64().unwrap(),
        o["analytic"].as_f64().unwrap(),
    );
    assert!((mean - exact).abs() <= 3.0 * se + 5.0 * 1e-3f64.sqrt(), "{mean} {se} {exact}");
}

#[test]
fn curve_rows_are_monotone_in_x() {
    let out = run(&["curve", "--mu", "0.4", "--mu-star", "0.9", "--grid-points", "30"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,V,V_hat,V_greedy"));
    let xs: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 30);
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
}
