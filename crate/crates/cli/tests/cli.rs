//! End-to-end checks of the `mcdisc` binary: happy paths and the exit-code
//! contract (0 success, 2 bad input, 3 size cap).

use std::process::{Command, Output};

fn mcdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcdisc"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn synth_prints_a_schedule() {
    let out = mcdisc(&[
        "synth",
        "--bp",
        "1,2,4",
        "--channels",
        "3",
        "--strategy",
        "psv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12); // passive scan: max(B)·|C| slots
    assert!(text.starts_with("0,0\n"));
}

#[test]
fn unknown_strategy_exits_with_config_error() {
    let out = mcdisc(&[
        "synth",
        "--bp",
        "1,2",
        "--channels",
        "2",
        "--strategy",
        "bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_period_exits_with_config_error() {
    let out = mcdisc(&[
        "synth",
        "--bp",
        "0,2",
        "--channels",
        "2",
        "--strategy",
        "psv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mdtopt_solves_the_small_example() {
    let out = mcdisc(&["mdtopt", "--bp", "1,2,4", "--channels", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# optimal mdt = 3/1"), "{}", text);
}

#[test]
fn mdtopt_rejects_oversized_instances_with_exit_3() {
    // LCM(1,2,3,5)·12 = 360 slots, beyond the exact-solver horizon cap.
    let out = mcdisc(&["mdtopt", "--bp", "1,2,3,5", "--channels", "12"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mdtopt_emits_lp_text() {
    let dir = std::env::temp_dir().join("mcdisc-cli-lp");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.lp");
    let out = mcdisc(&[
        "mdtopt",
        "--bp",
        "1,2,4",
        "--channels",
        "3",
        "--emit-lp",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lp = std::fs::read_to_string(&path).unwrap();
    assert!(lp.contains("Minimize"));
    assert!(lp.contains("Binary"));
}

#[test]
fn simulate_prints_per_trial_rows() {
    let out = mcdisc(&[
        "simulate",
        "--bp",
        "2,4,8",
        "--channels",
        "2",
        "--strategy",
        "chan-train",
        "--neighbors",
        "5",
        "--trials",
        "3",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // Header + three rows + summary comment.
    assert_eq!(text.lines().count(), 5, "{}", text);
}

#[test]
fn campaign_rejects_unknown_config_keys() {
    let dir = std::env::temp_dir().join("mcdisc-cli-badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "mode = numeric\nbogus_key = 1\n").unwrap();
    let out = mcdisc(&[
        "campaign",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
