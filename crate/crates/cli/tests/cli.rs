use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> (i32, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_sublinear"))
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    let code = status.status.code().expect("exit code");
    let report = fs::read_to_string(out.join("report.json")).map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (code, report)
}

fn code_of(outcome: &str) -> i32 {
    match outcome {
        "exists" => 0,
        "not_exists" => 1,
        "inconclusive" => 2,
        o => panic!("unknown outcome {o}"),
    }
}

#[test]
fn certify_step_problem_by_seno() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run("certify", &config("step.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(rep["certificate"]["proving_condition"], "seno");
    let csv = fs::read_to_string(dir.path().join("conditions.csv")).unwrap();
    assert!(csv.starts_with("name,lhs,rhs,margin,holds\n"));
    assert!(csv.lines().any(|l| l.starts_with("seno,") && l.ends_with(",true")));
}

#[test]
fn negative_weight_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("neg.json");
    fs::write(&cfg, r#"{"interval": [0, 1], "m": {"pieces": [{"range": [0, 1], "poly": [-1]}]}, "p": 0.5}"#).unwrap();
    let out = dir.path().join("out");
    let (code, rep) = run("certify", &cfg, &out, &[]);
    assert_eq!(code, 1);
    assert!(rep["certificate"]["reason"].as_str().unwrap().contains("trivial_mplus"), "{}", rep["certificate"]["reason"]);
}

#[test]
fn pstar_bracket_on_kappa_problem() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run("pstar", &config("kappa_sweep.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    let lo = rep["bracket"]["lower"].as_f64().unwrap();
    let hi = rep["bracket"]["upper"].as_f64().unwrap();
    assert!(lo >= 0.70 && hi < 1.0 && lo < hi, "{lo} {hi}");
    assert!(dir.path().join("pstar.csv").exists());
}

#[test]
fn solve_writes_solution_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run("solve", &config("step.json"), dir.path(), &["--grid", "800"]);
    assert_eq!(code, 0);
    assert_eq!(rep["solution"]["n"], 800);
    assert!(rep["solution"]["residual_inf"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("x,u,Lu,rhs,residual\n"));
    assert_eq!(csv.lines().count(), 803);
}

#[test]
fn malformed_config_exits_three_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"interval\": [0, 1],\n  \"m\": {\"pieces\": [{\"range\": [0, 1], \"poly\": \"one\"}]},\n  \"p\": 0.5\n}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sublinear")).args(["certify", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("m.pieces[0].poly"), "{err}");

    let out = Command::new(env!("CARGO_BIN_EXE_sublinear")).args(["sweep", "--sweep", "m.nope:0:1:2", "--config"]).arg(config("step.json")).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn deterministic_reports_and_matching_exit_codes() {
    for (cmd, cfg) in [("certify", "step.json"), ("certify", "kappa_sweep.json"), ("sweep", "kappa_sweep.json"), ("subsolution", "step.json")] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let (ca, ra) = run(cmd, &config(cfg), a.path(), &[]);
        let (cb, _) = run(cmd, &config(cfg), b.path(), &[]);
        assert_eq!(ca, cb);
        assert_eq!(ca, code_of(ra["outcome"].as_str().unwrap()), "{cmd} {cfg}");
        let ja = fs::read(a.path().join("report.json")).unwrap();
        let jb = fs::read(b.path().join("report.json")).unwrap();
        assert_eq!(ja, jb, "{cmd} {cfg}");
    }
}

#[test]
fn nonlinearity_command() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run("nonlinearity", &config("oscillating.json"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(rep["solution"]["residual_inf"].as_f64().unwrap() <= 1e-6);
    let (code, _) = run("nonlinearity", &config("step.json"), dir.path(), &[]);
    assert_eq!(code, 3);
}
