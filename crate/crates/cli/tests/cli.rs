use std::process::{Command, Output};

fn qcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcap"))
        .args(args)
        .env_remove("QCAP_ATOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn verify_private_example() {
    let out = qcap(&[
        "verify-private",
        "--d",
        "2",
        "--q",
        "1.0",
        "--p",
        "0.25",
        "--samples",
        "4",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["analytic"]["composite"], 1.0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["experiment"], "verify-private");
}

#[test]
fn verify_env_example() {
    let out = qcap(&["verify-env", "--d", "3", "--p", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rate = v["numeric"]["rate"].as_f64().unwrap();
    assert!((rate - 0.79248).abs() < 1e-5);
    assert_eq!(v["pass"], true);
}

#[test]
fn scan_region_example() {
    let out = qcap(&["scan-region", "--grid", "3", "--mode", "asymptotic"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("q,p,delta"));
    assert!(text.lines().any(|l| l == "0.5,0.5,0.125"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn scan_region_svg_and_finite_mode() {
    let out = qcap(&["scan-region", "--grid", "21", "--format", "svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains(r#"width="512" height="512""#));
    assert!(svg.contains("<path"));

    let out = qcap(&["scan-region", "--grid", "5", "--mode", "finite", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "0.5,0.5,-0.875"));
}

#[test]
fn bell_gram_and_functional() {
    let v = json(&qcap(&["bell-gram", "--d", "4"]));
    assert_eq!(v["numeric"]["distinct"], 2.0);
    assert_eq!(v["pass"], true);
    let out = qcap(&["functional", "--d", "2", "--q", "0.5", "--p", "0.5", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["params"]["evaluator"], "two-use-coherent");
}

#[test]
fn failed_check_exits_one() {
    // no witness: the functional stays below the erasure capacity at p = 0
    let out = qcap(&["functional", "--d", "2", "--q", "0.5", "--p", "0.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qcap(&["scan-region", "--grid", "1"]).status.code(), Some(2));
    assert_eq!(qcap(&["scan-region", "--mode", "finite"]).status.code(), Some(2));
    assert_eq!(qcap(&["verify-env", "--d", "3", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(
        qcap(&["verify-env", "--p", "0.5", "--format", "svg"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qcap(&["verify-env", "--p", "0.5", "--atol", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(qcap(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn atol_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcap"))
        .args(["bell-gram", "--d", "3"])
        .env("QCAP_ATOL", "-3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_qcap"))
        .args(["bell-gram", "--d", "3"])
        .env("QCAP_ATOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn out_path_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qcap(&["bell-gram", "--d", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["experiment"], "bell-gram");

    let bad = dir.path().join("missing").join("report.json");
    let out = qcap(&["bell-gram", "--d", "3", "--out", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn timing_goes_to_stderr() {
    let out = qcap(&["verify-env", "--d", "3", "--p", "0.5", "--timing"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("runtime_ms "));
    assert!(json(&out)["runtime_ms"].as_f64().unwrap() > 0.0);
}
