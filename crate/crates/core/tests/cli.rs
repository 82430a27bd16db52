use std::process::Command;

use localw1::experiments::CSV_HEADER;

fn localw1(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_localw1")).args(args).output().expect("binary runs")
}

#[test]
fn props_writes_csv_and_exits_zero() {
    let out = localw1(&["props", "--n", "2", "--trials", "4", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert!(csv.lines().nth(1).unwrap().starts_with("props,2,0,,manifest:"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS duality"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gibbs.toml");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, "experiment = \"gibbs-check\"\nn = 3\ntrials = 50\nseed = 1\n").unwrap();
    let out = localw1(&["run", "--config", cfg.to_str().unwrap(), "--trials", "3", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",holder_slack,")).count(), 3);
}

#[test]
fn shadow_file_feeds_the_evaluator() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("shadows.txt");
    let out = localw1(&["sample-shadows", "--state", "ghz+:3", "--count", "500", "--seed", "2", "--out", records.to_str().unwrap()]);
    assert!(out.status.success());
    let cfg = dir.path().join("eval.toml");
    std::fs::write(
        &cfg,
        format!("experiment = \"w1loc-eval\"\nn = 3\nstate = \"ghz+:3\"\nshadows = {:?}\n", records.to_str().unwrap()),
    )
    .unwrap();
    let out = localw1(&["w1loc-eval", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let w: f64 = csv.lines().find(|l| l.contains(",w1loc,")).unwrap().rsplit(',').nth(1).unwrap().parse().unwrap();
    assert!(w > 0.0 && w < 3.0, "{w}");
}

#[test]
fn exact_metric_above_the_cap_is_rejected() {
    let out = localw1(&["shadow-converge", "--n", "9", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("upper-bound"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = ["bell-converge", "--n", "2", "--w", "0.6,0.5", "--trials", "5", "--seed", "11"];
    assert_eq!(localw1(&args).stdout, localw1(&args).stdout);
}
