use std::{
    path::{Path, PathBuf},
    process::{Command, Output},
};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn hicluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hicluster"))
        .args(args)
        .env_remove("HICLUSTER_MAX_N")
        .output()
        .expect("spawn hicluster")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = hicluster(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn average_linkage_on_dissimilarity_triangle() {
    let out = ok(&["cluster", "--input", &fixture("fix-tri.graph"), "--algo", "average", "--stats"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("((0,1),2)"));
    assert_eq!(lines.next(), Some("value 14"));
    let stats: serde_json::Value = serde_json::from_str(lines.next().expect("stats line")).expect("json");
    assert_eq!(stats["value"], 14.0);
    assert_eq!(stats["mode"], "dis");
}

#[test]
fn eval_and_opt_on_path() {
    let p4 = fixture("fix-p4.graph");
    let out = ok(&["eval", "--input", &p4, "--tree", "((0,1),(2,3))", "--per-node"]);
    assert_eq!(out, "value 8\nnode 2 {0 1}\nnode 2 {2 3}\nnode 4 {0 1 2 3}\n");
    assert_eq!(ok(&["opt", "--input", &p4]), "value 8\n((0,1),(2,3))\n");
}

#[test]
fn generated_path_matches_fixture() {
    let text = std::fs::read_to_string(fixture("fix-p4.graph")).unwrap();
    assert_eq!(ok(&["gen", "path", "--n", "4"]), text);
}

#[test]
fn check_verdicts() {
    let p4 = fixture("fix-p4.graph");
    let no = ok(&["check", "--generating", "--input", &p4, "--tree", "((0,2),(1,3))"]);
    assert!(no.starts_with("no\n"), "{no}");
    assert!(ok(&["check", "--ultrametric", "--input", &p4]).starts_with("no"));
    assert!(ok(&["check", "--admissible", "--n-max", "6"]).ends_with("admissible yes\n"));
}

#[test]
fn ultrametric_generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gentree");
    let b = dir.path().join("b.gentree");
    let hash = |p: &Path| {
        let out = ok(&["gen", "ultrametric", "--n", "12", "--seed", "5", "--strict", "-o", path_str(p)]);
        out.split_whitespace().nth(1).expect("hash").to_string()
    };
    assert_eq!(hash(&a), hash(&b));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ultrametric_graph_is_generated_by_its_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.gentree");
    let graph = dir.path().join("t.graph");
    ok(&["gen", "ultrametric", "--n", "9", "--seed", "2", "-o", path_str(&tree), "--graph", path_str(&graph)]);
    assert!(ok(&["check", "--ultrametric", "--input", path_str(&graph)]).starts_with("yes"));
    let v = ok(&["check", "--generating", "--input", path_str(&graph), "--tree", path_str(&tree)]);
    assert!(v.starts_with("yes"), "{v}");
}

#[test]
fn hsbm_writes_labels_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.graph");
    let printed = ok(&["gen", "hsbm", "--config", &fixture("hsbm-k2.toml"), "--seed", "1", "-o", path_str(&out)]);
    assert_eq!(printed.lines().count(), 2);
    let labels = std::fs::read_to_string(dir.path().join("h.graph.labels")).unwrap();
    assert!(labels.starts_with("hicluster-labels 1 300 2\n"));
    assert_eq!(labels.lines().count(), 301);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hicluster(&["frobnicate"]).status.code(), Some(2));
    let tri = fixture("fix-tri.graph");
    let o = hicluster(&["cluster", "--input", &tri, "--algo", "densest-ls", "--mode", "sim"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hicluster(&["cluster", "--input", "/nonexistent/x.graph", "--algo", "single"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("p18.graph");
    ok(&["gen", "path", "--n", "18", "-o", path_str(&g)]);
    assert_eq!(hicluster(&["opt", "--input", path_str(&g)]).status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_hicluster"))
        .args(["opt", "--input", path_str(&g)])
        .env("HICLUSTER_MAX_N", "18")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn empty_bench_spec_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("empty.toml");
    std::fs::write(&spec, "").unwrap();
    let out = ok(&["bench", "--spec", path_str(&spec)]);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("instance,n,seed,algo,objective_value"));
}

#[test]
fn bench_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    std::fs::write(&spec, "[[experiment]]\nkind = \"avg-bound\"\nn = [3, 8]\nseeds = 3\n").unwrap();
    let a = ok(&["bench", "--spec", path_str(&spec), "--format", "json"]);
    let b = ok(&["bench", "--spec", path_str(&spec), "--format", "json"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 18);
}

#[test]
fn plugin_cut_finder() {
    let out = ok(&["cluster", "--input", &fixture("fix-p4.graph"), "--algo", "sparsest", "--cutfinder", "plugin:echo 0"]);
    assert_eq!(out, "(0,(1,(2,3)))\nvalue 9\n");
}
