use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn boolcorr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boolcorr")).current_dir(dir).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("and.json", r#"{"n": 2, "d": 2, "table": "0001"}"#),
        ("xor.json", r#"{"n": 2, "d": 2, "table": "0110"}"#),
        ("dsbs.json", r#"{"joint": [[0.4, 0.1], [0.1, 0.4]], "n": 2}"#),
        ("dsbs1.json", r#"{"joint": [[0.45, 0.05], [0.05, 0.45]], "n": 1}"#),
        ("bad.json", r#"{"n": 2, "d": 2, "table": "01"}"#),
    ];
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

#[test]
fn spectrum_of_and() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["spectrum", "--fn", "and.json", "--bias", "0.5", "--csv", "s.csv"]));
    assert!((v["total"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("mask,coordinates,weight,variance"));
    assert_eq!(csv.lines().count(), 4);
    assert!(v["manifest"]["outputs"].as_object().unwrap().keys().any(|k| k.ends_with("s.csv")));
}

#[test]
fn psi_of_dsbs() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["psi", "--joint", "dsbs1.json"]));
    assert!((v["psi"].as_f64().unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn bound_contains_exact_value() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["bound", "--e", "xor.json", "--f", "xor.json", "--joint", "dsbs.json"]));
    let sigma = v["exact_sigma"].as_f64().unwrap();
    assert!((sigma - 0.32).abs() < 1e-12);
    assert!(v["lower"].as_f64().unwrap() <= sigma + 1e-9);
}

#[test]
fn selftest_passes() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["selftest"]));
    assert_eq!(v["failed"], 0);
}

#[test]
fn netbound_mac_rate() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["netbound", "mac-rate", "--q", "2", "--delta", "0.1"]));
    assert!((v["rate_bits"].as_f64().unwrap() - 0.5310044064107188).abs() < 1e-12, "{v}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = setup();
    for args in [
        &["frobnicate"][..],
        &["spectrum", "--fn", "and.json", "--bias", "0.5", "--bogus"],
        &["ensemble", "concentration", "--n", "6", "--rate", "0.6", "--m", "2", "--samples", "3"],
        &["spectrum", "--fn", "bad.json", "--bias", "0.5"],
        &["spectrum", "--fn", "missing.json", "--bias", "0.5"],
        &["spectrum", "--fn", "and.json", "--bias", "1.5"],
    ] {
        assert_eq!(boolcorr(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn exact_disagreement_too_large_exits_3() {
    let dir = setup();
    let n = 14;
    let f = format!(r#"{{"n": {n}, "d": 2, "table": "{}"}}"#, "01".repeat(1 << (n - 1)));
    std::fs::write(dir.path().join("big.json"), f).unwrap();
    std::fs::write(dir.path().join("big_joint.json"), format!(r#"{{"joint": [[0.4, 0.1], [0.1, 0.4]], "n": {n}}}"#))
        .unwrap();
    let out = boolcorr(dir.path(), &["bound", "--e", "big.json", "--f", "big.json", "--joint", "big_joint.json", "--exact"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rerun_rejects_changed_input() {
    let dir = setup();
    let out = boolcorr(dir.path(), &["--out", "r.json", "spectrum", "--fn", "and.json", "--bias", "0.5"]);
    assert!(out.status.success());
    assert_eq!(boolcorr(dir.path(), &["rerun", "r.json"]).status.code(), Some(0));
    std::fs::write(dir.path().join("and.json"), r#"{"n": 2, "d": 2, "table": "0111"}"#).unwrap();
    assert_eq!(boolcorr(dir.path(), &["rerun", "r.json"]).status.code(), Some(2));
}

#[test]
fn manifest_omits_thread_count() {
    let dir = setup();
    let v = json(&boolcorr(dir.path(), &["--threads", "3", "psi", "--joint", "dsbs1.json"]));
    let args: Vec<&str> = v["manifest"]["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert_eq!(args, ["psi", "--joint", "dsbs1.json"]);
    assert!(v["manifest"].get("wall_clock_ms").is_none());
}
