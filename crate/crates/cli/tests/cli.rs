use std::path::Path;
use std::process::{Command, Output};

fn codiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codiff"))
        .args(args)
        .env("CODIFF_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const QUICK: [&str; 4] = ["--budget", "pairs=10", "--budget", "max_affine=2"];

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = codiff(&["run", "--suite", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("first-order"));
}

#[test]
fn bad_override_is_an_error() {
    let out = codiff(&["run", "--suite", "demyanov", "--tol", "nonsense=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_suite_exits_zero() {
    let mut args = vec!["verify", "--suite", "demyanov"];
    args.extend(QUICK);
    let out = codiff(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS C1")), "{text}");
}

#[test]
fn failing_row_exits_one() {
    let out = codiff(&["run", "--suite", "sawtooth", "--tol", "clarke=1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL C8.clarke"));
}

#[test]
fn reports_are_reproducible_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let mut args = vec!["run", "--suite", "demyanov", "--no-timing", "--out", out_dir.to_str().unwrap()];
        args.extend(QUICK);
        assert_eq!(codiff(&args).status.code(), Some(0));
        outs.push(std::fs::read(out_dir.join("report.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn one_shot_commands_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "abs.json",
        r#"{"anchor": [0.0], "hypo_pieces": [{"a": 0.0, "v": [1.0]}, {"a": 0.0, "v": [-1.0]}]}"#,
    );
    for cmd in ["subdiff", "codiff", "second"] {
        let out = codiff(&[cmd, "--problem", &model]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let sub = &v["subdifferential"]["vertices"];
        assert_eq!(sub.as_array().unwrap().len(), 2, "{cmd}: {v}");
    }
    let out = codiff(&["codiff", "--problem", &model, "--at", "-0.05"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["max_offset"], 0.0);

    let a = write(dir.path(), "a.json", r#"{"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1], [1, 1]]}"#);
    let b = write(dir.path(), "b.json", r#"{"dim": 2, "vertices": [[0, 0], [1, 0]]}"#);
    for extra in [None, Some("--exact")] {
        let mut args = vec!["demyanov-diff", a.as_str(), b.as_str()];
        args.extend(extra);
        let out = codiff(&args);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["difference"]["vertices"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn malformed_problem_is_reported_with_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "bad.json", "{\n  \"anchor\": [0.0],\n  \"hypo_pieces\": [\n}");
    let out = codiff(&["subdiff", "--problem", &model]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}
