use std::process::Command;

use indist_core::behaviors::{pr_like_box, random_behavior, Behavior};
use indist_core::exclusivity::{search_partition_n2, Event};
use indist_core::behaviors::svetlichny_signs;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn indist(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_indist")).args(args).output().unwrap()
}

#[test]
fn behavior_json_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=4 {
        let b = random_behavior(n, &mut rng).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: Behavior = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
    }
}

#[test]
fn behavior_json_schema() {
    let v: Value = serde_json::to_value(pr_like_box()).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["table"]["00"]["11"], 0.5);
    assert_eq!(v["table"]["11"]["01"], 0.25);
    assert_eq!(v["table"].as_object().unwrap().len(), 4);
}

#[test]
fn invalid_behavior_json_is_rejected() {
    let bad_key = r#"{"n":1,"table":{"0":{"0":1.0,"1":0.0},"2":{"0":1.0,"1":0.0}}}"#;
    assert!(serde_json::from_str::<Behavior>(bad_key).is_err());
    let negative = r#"{"n":1,"table":{"0":{"0":1.5,"1":-0.5},"1":{"0":1.0,"1":0.0}}}"#;
    assert!(serde_json::from_str::<Behavior>(negative).is_err());
}

#[test]
fn partition_file_is_verified_by_cli() {
    let sets = search_partition_n2(&svetlichny_signs(2).unwrap()).unwrap().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, serde_json::to_string(&sets).unwrap()).unwrap();
    let out = indist(&["exclusivity-verify", "--partition", good.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["partition_source"], "file");
    assert_eq!(v["result"]["partition"]["valid"], true);

    let mut broken: Vec<Vec<Event>> = sets.clone();
    broken[0].truncate(3);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&broken).unwrap()).unwrap();
    let out = indist(&["exclusivity-verify", "--partition", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let record: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').find(|l| l.starts_with(b"{")).unwrap()).unwrap();
    assert_eq!(record["status"], "check_failed");
    assert_eq!(record["failed"][0], "partition_valid");
}

#[test]
fn usage_errors_exit_nonzero_with_record() {
    for args in [&["nbody", "9"][..], &["chsh-max", "three"], &["schmidt", "--theta", "nope"]] {
        let out = indist(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        let last = stderr.lines().last().unwrap();
        let v: Value = serde_json::from_str(last).unwrap();
        assert_eq!(v["status"], "error");
        assert_eq!(v["schema"], 1);
    }
}

#[test]
fn input_errors_exit_nonzero() {
    let out = indist(&["schmidt", "--theta", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = indist(&["exclusivity-verify", "--partition", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_shape() {
    let out = indist(&["schmidt", "--theta", "180deg"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "schmidt");
    assert_eq!(v["invocation"], "indist schmidt --theta 180deg");
    assert!((v["result"]["entropy"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn csv_output_shape() {
    let out = indist(&["entropy-scan", "--grid", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# indist entropy-scan --grid 3 --format csv");
    let data: Vec<&str> = lines.iter().copied().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "theta,phi,lambda0,lambda1,entropy");
    assert_eq!(data.len(), 4);
    let last: Vec<f64> = data[3].split(',').map(|c| c.parse().unwrap()).collect();
    assert!((last[0] - std::f64::consts::PI).abs() < 1e-15);
    assert!((last[4] - 1.0).abs() < 1e-9);
}

#[test]
fn out_flag_writes_file_and_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prbox.json");
    let out = indist(&["prbox", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["s2"], 3.0);
    assert_eq!(v["invocation"], "indist prbox");
}
