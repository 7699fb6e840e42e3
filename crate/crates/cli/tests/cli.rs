use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spanbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanbound")).args(args).output().expect("run spanbound")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn circle(dir: &Path) -> String {
    let path = dir.join("c.csv");
    let out = spanbound(&["gen", "--shape", "circle", "--n", "60", "--params", "r=1", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--shape", "ellipsoid", "--n", "40", "--seed", "11"];
    let (a, b) = (spanbound(&args), spanbound(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("dim=3,norm=l2\n"));
    assert_eq!(stdout(&a).lines().count(), 41);
    let c = spanbound(&["gen", "--shape", "ellipsoid", "--n", "40", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_circle_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = circle(dir.path());
    let out = spanbound(&["verify", "--input", &input, "--checks", "T1,T4,T9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "satisfied"));
    for id in ["T1", "T4", "T9"] {
        assert!(checks.iter().any(|c| c["theorem_id"] == id), "no {id} rows");
    }
}

#[test]
fn pd_has_a_degree_one_interval() {
    let dir = tempfile::tempdir().unwrap();
    let input = circle(dir.path());
    let out = spanbound(&["pd", "--input", &input, "--max-dim", "2"]);
    assert!(out.status.success());
    let pd: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ones = pd["degrees"]["1"].as_array().unwrap();
    assert_eq!(ones.len(), 1);
    let death = ones[0][1].as_f64().unwrap();
    assert!((0.98..=1.0).contains(&death), "{death}");
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = circle(dir.path());
    let out = spanbound(&["verify", "--input", &input, "--checks", "T9", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("dataset,theorem,degree,filtration,"));
    assert!(text.lines().skip(1).all(|l| l.contains(",T9,")));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let out = spanbound(&["pd", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = spanbound(&["pd", "--input", "/nonexistent/points.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "dim=2,norm=l2\n1,2\n3\n").unwrap();
    let out = spanbound(&["pd", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn unmet_prerequisite_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = circle(dir.path());
    let out = spanbound(&["verify", "--input", &input, "--checks", "T6", "--core", "mst"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupted_deaths_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = circle(dir.path());
    let out = spanbound(&["verify", "--input", &input, "--checks", "T9", "--inject-death-factor", "1.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violation"));
}

#[test]
fn help_exits_zero() {
    let out = spanbound(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verify"));
}
