use std::path::Path;
use std::process::{Command, Output};

fn cdst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdst")).args(args).output().expect("binary runs")
}

fn gen(dir: &Path, extra: &[&str]) {
    let mut args = vec!["gen", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = cdst(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generate_solve_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("corpus");
    gen(&dir, &["--count", "4", "--sinks", "2-5", "--grid", "8x8x2", "--dbif", "1", "--eta", "0.25"]);
    assert!(dir.join("manifest.csv").exists());

    let solve = cdst(&["solve", dir.to_str().unwrap(), "--trace"]);
    assert!(solve.status.success());
    let text = String::from_utf8(solve.stdout).unwrap();
    assert!(text.starts_with("id,algo,connection_cost"));
    assert!(text.contains("\"iteration\""));

    let compare = cdst(&["compare", dir.to_str().unwrap(), "--threads", "2"]);
    assert!(compare.status.success());
    let table = String::from_utf8(compare.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("all,4,")), "{table}");

    let verify = cdst(&["verify", dir.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0), "{}", String::from_utf8_lossy(&verify.stdout));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("corpus");
    gen(&dir, &["--count", "6", "--sinks", "1-9", "--grid", "8x8x2", "--weights", "lognormal", "--dbif", "2"]);
    let run = |threads: &str| cdst(&["compare", dir.to_str().unwrap(), "--per-instance", "--threads", threads]).stdout;
    assert_eq!(run("1"), run("4"));
}

#[test]
fn exit_codes() {
    assert_eq!(cdst(&["gen", "--sinks", "0", "--out", "/nonexistent/x"]).status.code(), Some(1));
    assert_eq!(cdst(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cdst(&["--help"]).status.code(), Some(0));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(cdst(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cdst(&["solve", tmp.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));

    // more than four sinks are out of reach for the exact oracle
    let dir = tmp.path().join("big");
    gen(&dir, &["--count", "1", "--sinks", "6"]);
    assert_eq!(cdst(&["oracle", dir.to_str().unwrap()]).status.code(), Some(1));
}

/// An inadmissible heuristic must be caught by the verifier.
#[test]
fn verify_flags_an_inflated_heuristic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("corpus");
    gen(&dir, &["--count", "8", "--sinks", "4-8", "--grid", "10x10x2", "--congestion", "hotspots", "--wire-types", "2", "--weights", "lognormal", "--dbif", "1"]);
    let out = cdst(&["verify", dir.to_str().unwrap(), "--inflate-heuristic", "50"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}
