use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn knead(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knead")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_lines(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&knead(&["check"])), 0);
    assert_eq!(code(&knead(&["check", "--a", "1.2"])), 2);
    let o = knead(&["check", "--map", "henon", "--a", "1.0"]);
    assert_eq!(code(&o), 0);
    assert!(!o.stderr.is_empty() || !o.stdout.is_empty());
}

#[test]
fn admissible_exit_codes() {
    let dir = TempDir::new().unwrap();
    let k = path(&dir, "k.json");
    assert_eq!(code(&knead(&["kneading", "--out", s(&k)])), 0);

    let o = knead(&["admissible", "(+).+-+--", "--kneading", s(&k), "--depth", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_lines(&o)[0]["verdict"], "admissible");

    let o = knead(&["admissible", "(+).--+-+++----", "--kneading", s(&k), "--depth", "5"]);
    assert_eq!(code(&o), 3);
    let v = &json_lines(&o)[0];
    assert_eq!(v["verdict"], "rejected");
    assert_eq!(v["index"], -1);

    let o = knead(&["admissible", "~~~~~~~~~~.~~~~~~~~~~~", "--kneading", s(&k), "--depth", "10"]);
    assert_eq!(code(&o), 4);
    assert_eq!(json_lines(&o)[0]["verdict"], "budget_exceeded");
}

#[test]
fn errors_are_json_on_stderr() {
    let o = knead(&["admissible", "+-.-+", "--kneading", "/nonexistent/k.json"]);
    assert_eq!(code(&o), 5);
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v["error"].as_str().unwrap().contains("k.json"));

    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, r#"{"format_version": 9, "kind": "folding"}"#).unwrap();
    let o = knead(&["tree", s(&bad)]);
    assert_eq!(code(&o), 5);
}

#[test]
fn conversions_round_trip() {
    let dir = TempDir::new().unwrap();
    let (f, t, f2, k, f3) = (
        path(&dir, "f.json"),
        path(&dir, "t.json"),
        path(&dir, "f2.json"),
        path(&dir, "k.json"),
        path(&dir, "f3.json"),
    );
    assert_eq!(code(&knead(&["folding", "--generations", "6", "--out", s(&f)])), 0);
    assert_eq!(code(&knead(&["tree", s(&f), "--out", s(&t)])), 0);
    assert_eq!(code(&knead(&["convert", s(&t), "--to", "folding", "--out", s(&f2)])), 0);
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("source");
        v
    };
    assert_eq!(strip(&f), strip(&f2));

    // folding -> kneading -> folding
    assert_eq!(code(&knead(&["convert", s(&f), "--to", "kneading", "--out", s(&k)])), 0);
    assert_eq!(code(&knead(&["folding", "--from", s(&k), "--generations", "6", "--out", s(&f3)])), 0);
    let o = knead(&["compare", s(&f), s(&f3)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json_lines(&o)[0]["result"], "equal");
}

#[test]
fn tree_as_dot() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "f.json");
    knead(&["folding", "--generations", "4", "--out", s(&f)]);
    let o = knead(&["tree", s(&f), "--dot"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("->"));
}

#[test]
fn compare_reports_differences() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    knead(&["kneading", "--out", s(&a)]);
    knead(&["kneading", "--a", "1.7", "--b", "0.35", "--out", s(&b)]);
    let o = knead(&["compare", s(&a), s(&a)]);
    assert_eq!(code(&o), 0);
    let o = knead(&["compare", s(&a), s(&b)]);
    assert_eq!(code(&o), 1);
    assert_eq!(json_lines(&o)[0]["result"], "differ");

    let o = knead(&["compare", "--sweep", "1.7,0.35", "--sweep", "1.8,0.3", "--jobs", "2"]);
    assert_eq!(code(&o), 1);
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["result"], "differ");
    assert_eq!(lines[1]["result"], "equal");
}

#[test]
fn csv_outputs() {
    let o = knead(&["region", "+.+", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("polygon,vertex,x,y\n"));
    assert!(text.lines().count() > 3);

    let o = knead(&["manifold", "--map", "henon", "--arclength", "10", "--candidates", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("index,x,y,arclength,score,heuristic\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn henon_artifacts_are_marked_heuristic() {
    let o = knead(&["folding", "--map", "henon", "--generations", "4"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["heuristic"], true);
    assert_eq!(v["source"]["map"], "henon");
}
