use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn iwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwlab")).args(args).env_remove("IWLAB_JOBS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn strip_timing(v: &mut Value) {
    for s in v.as_array_mut().unwrap() {
        s.as_object_mut().unwrap().remove("wall_ms");
    }
}

#[test]
fn fitt_of_diag_3_3_is_generated_by_3() {
    let out = iwlab(&["fitt", "--in", &fixture("diag_3_3.json"), "--i", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ideal"]["howell_canonical"]["rows"], serde_json::json!([[3]]));
    assert_eq!(v["ideal"]["unit"], false);
    let f0 = json(&iwlab(&["fitt", "--in", &fixture("diag_3_3.json"), "--i", "0"]));
    assert_eq!(f0["ideal"]["howell_canonical"]["rows"], serde_json::json!([]));
    let f2 = json(&iwlab(&["fitt", "--in", &fixture("diag_3_3.json"), "--i", "2"]));
    assert_eq!(f2["ideal"]["unit"], true);
}

#[test]
fn fitt_base_change_to_lower_precision() {
    let out = iwlab(&["fitt", "--in", &fixture("diag_3_3.json"), "--i", "1", "--precision", "1", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("(0)"));
}

#[test]
fn malformed_json_is_a_usage_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"base\": {\"ring\": \n").unwrap();
    let out = iwlab(&["fitt", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("malformed JSON") && err.contains("line"), "{err}");
    assert!(out.stdout.is_empty());

    std::fs::write(&path, "{\"base\": [1]}").unwrap();
    let out = iwlab(&["fitt", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid input"));
}

#[test]
fn missing_input_and_unknown_suite_exit_2() {
    assert_eq!(iwlab(&["fitt", "--in", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(iwlab(&["selftest", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(iwlab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn euler_check_reports_corruption() {
    let good = iwlab(&["euler", "check", "--in", &fixture("instance.json")]);
    assert_eq!(good.status.code(), Some(0));
    assert_eq!(json(&good)["violations"], serde_json::json!([]));
    let bad = iwlab(&["euler", "check", "--in", &fixture("corrupted.json")]);
    assert_eq!(bad.status.code(), Some(1));
    let v = json(&bad);
    let violations = v["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 3);
    assert!(violations.iter().all(|x| x["edge"].to_string().contains("l2")));
}

#[test]
fn euler_gen_is_seeded() {
    let args = ["euler", "gen", "--gamma", "3", "--primes", "3,3", "--seed", "7"];
    let a = iwlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, iwlab(&args).stdout);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(fixture("instance.json")).unwrap()).unwrap();
    assert_eq!(json(&a), on_disk);
    let other = iwlab(&["euler", "gen", "--gamma", "3", "--primes", "3,3", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn invalid_tower_shapes_are_errors() {
    assert_eq!(iwlab(&["euler", "gen", "--delta", "3"]).status.code(), Some(2));
    assert_eq!(iwlab(&["euler", "gen", "--gamma", "2"]).status.code(), Some(2));
}

#[test]
fn euler_ideals_and_compat() {
    let out = iwlab(&["euler", "ideals", "--in", &fixture("instance.json")]);
    assert_eq!(out.status.code(), Some(0));
    let out = iwlab(&["euler", "compat", "--in", &fixture("instance.json"), "--factor", "0", "--unit", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = iwlab(&["euler", "derive", "--in", &fixture("instance.json"), "--layer", "0", "--n", "l1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn derivative_at_an_inadmissible_modulus_is_refused() {
    let out = iwlab(&["euler", "derive", "--in", &fixture("instance.json"), "--layer", "1", "--n", "l1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible"));
}

#[test]
fn ideal_commands() {
    let out = iwlab(&["ideal", "compare", "--in", &fixture("relation.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("equivalent: true"));

    let out = iwlab(&["ideal", "goodprime", "--in", &fixture("goodprime.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("(a1, a2, u) = (1, 1, [1])"));

    let text = |i: &str| {
        let out = iwlab(&["ideal", "slope", "--in", &fixture("slope.json"), "--i", i, "--format", "text"]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    assert!(text("0").contains("[4, 7, 10, 13, 16, 19]; ord = 3"));
    assert!(text("1").contains("[2, 3, 4, 5, 6, 7]; ord = 1"));
}

#[test]
fn howell_bidual_kolyvagin() {
    let out = iwlab(&["howell", "--in", &fixture("matrix.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "[2, 0]\n[0, 2]\n");

    let out = iwlab(&["bidual", "--in", &fixture("free_c3.json"), "--i", "1", "--precision", "2"]);
    assert_eq!(out.status.code(), Some(0));

    let out = iwlab(&["kolyvagin", "--in", &fixture("kolyvagin.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("s_n(x)"));
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let out = iwlab(&["selftest", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut first = json(&out);
    let suites = first.as_array().unwrap();
    assert!(suites.len() >= 12);
    assert!(suites.iter().all(|s| s["failures"] == serde_json::json!([]) && s["seed"] == 42));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let again = Command::new(env!("CARGO_BIN_EXE_iwlab"))
        .args(["selftest", "--seed", "42", "--out", path.to_str().unwrap()])
        .env("IWLAB_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(again.status.code(), Some(0));
    assert!(again.stdout.is_empty());
    let mut second: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    strip_timing(&mut first);
    strip_timing(&mut second);
    assert_eq!(first, second);
}

#[test]
fn selftest_text_and_filter() {
    let out = iwlab(&["selftest", "--suite", "telescoping", "--suite", "slope", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
}
