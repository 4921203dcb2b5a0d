use std::process::{Command, Output};

use serde_json::Value;

fn choi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choi"))
        .args(args)
        .output()
        .expect("run choi")
}

fn json(args: &[&str]) -> Value {
    let out = choi(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("one JSON document")
}

#[test]
fn classify_vertex() {
    let doc = json(&["classify", "1", "0.7320508", "0", "pi/6", "--json"]);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["kind"], "classify");
    assert_eq!(doc["flags"]["face"], "v_1b0");
    assert_eq!(doc["flags"]["optimal"], true);
    assert_eq!(doc["flags"]["spanning"], false);
    for key in ["params", "evidence"] {
        assert!(doc.get(key).is_some());
    }
    assert!(doc["evidence"]["spectral"]["choi_eigenvalues"].is_array());
}

#[test]
fn classify_interior_and_exterior() {
    let doc = json(&["classify", "0.5", "1", "0.25", "pi/6", "--json"]);
    assert_eq!(doc["flags"]["positive"], true);
    assert_eq!(doc["flags"]["spanning"], true);

    let doc = json(&["classify", "0.1", "0.1", "0.1", "pi/6", "--json"]);
    assert_eq!(doc["flags"]["positive"], false);
    assert_eq!(doc["flags"]["face"], "exterior");
}

#[test]
fn plain_output_is_derived_from_the_document() {
    let out = choi(&["classify", "0.5", "1", "0.25", "pi/6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("positive: Y"));
    assert!(text.contains("spanning: Y"));
}

#[test]
fn witness_exit_codes() {
    let doc = json(&["witness", "pi/6", "1", "--json"]);
    assert!(doc["evidence"]["detection_value"].as_f64().unwrap() < 0.0);
    assert_eq!(doc["flags"]["detects"], true);

    let out = choi(&["witness", "pi/6", "1", "--alpha-tilde", "1.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: positive pairing"));

    assert_eq!(choi(&["witness", "0", "1"]).status.code(), Some(2));
    assert_eq!(choi(&["witness", "-pi/6", "1"]).status.code(), Some(0));
}

#[test]
fn usage_and_theta_errors() {
    assert_eq!(choi(&["classify", "1", "1", "1", "0"]).status.code(), Some(2));
    assert_eq!(choi(&["classify", "1", "1"]).status.code(), Some(1));
    assert_eq!(choi(&["classify", "1", "1", "1", "pie"]).status.code(), Some(1));
    assert_eq!(choi(&["sweep", "pi/6", "0"]).status.code(), Some(1));
    assert_eq!(choi(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("s{k}.csv"))).collect();
    for p in &paths {
        let out = choi(&["sweep", "-2pi/3", "12", "--plane", "bc", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("a,b,c,theta,face,cp,ccp,positive\n"));
    assert_eq!(text.lines().count(), 1 + 144);
}

#[test]
fn io_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    let out = choi(&["sweep", "pi/6", "3", "--out", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn figure_data() {
    let out = choi(&["figure-data", "1", "--grid-n", "7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("theta,p_theta\n"));
    assert_eq!(text.lines().count(), 8);

    let out = choi(&["figure-data", "3", "--grid-n", "4", "--extent", "2"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("b,c,theta,a_min,face\n"));

    assert_eq!(choi(&["figure-data", "4"]).status.code(), Some(1));
}
