use std::fs;
use std::process::{Command, Output};

fn brokenline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brokenline")).args(args).output().expect("spawn brokenline")
}

#[test]
fn print_config_round_trips() {
    let out = brokenline(&["verify-kernel", "--print-config", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, &out.stdout).unwrap();
    let again = brokenline(&["verify-kernel", "--print-config", "--config", path.to_str().unwrap()]);
    assert_eq!(again.stdout, out.stdout);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 11);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.json", r#"{"not_a_field": 1}"#),
        ("syntax.json", r#"{"seed": "#),
        ("invalid.json", r#"{"growth_tol": -1.0}"#),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let out = brokenline(&["verify-kernel", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = brokenline(&["verify-kernel", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn failed_contract_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strict.json");
    // roundoff alone exceeds this symmetry tolerance
    fs::write(&path, r#"{"verify_kernel": {"symmetry_tol": 1e-300}}"#).unwrap();
    let out = brokenline(&["verify-kernel", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = brokenline(&["verify-kernel", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("verify-kernel.csv")).unwrap();
    assert!(csv.starts_with("check,d,lambda,value,bound,pass"));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify-kernel.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "verify-kernel");
    assert!(meta["checks"].as_array().is_some_and(|c| !c.is_empty()));
}
