use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use colorank::io;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colorank"))
        .args(args)
        .env_remove("COLORANK_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rank_on_the_binary_fixture() {
    let b4 = fixture("b4.tree");
    let out = run(&["rank", "--input", path_str(&b4)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let listing = io::parse_rank_listing(&text(&out.stdout)).unwrap();
    assert_eq!(listing.tree_rank, 3);
    let level_one: Vec<u32> = listing
        .values
        .iter()
        .filter(|(k, _)| k.starts_with("[0,1|"))
        .map(|(_, (v, _))| *v)
        .collect();
    assert_eq!(level_one, vec![2]);
}

#[test]
fn malformed_tree_exits_with_input_error() {
    let out = run(&["validate", "--input", path_str(&fixture("malformed.tree"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 3"), "{}", text(&out.stderr));
}

#[test]
fn missing_input_is_an_input_error() {
    let out = run(&["rank", "--input", "/nonexistent/tree.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["chain", "--input", path_str(&fixture("b4.tree"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tiny_budget_exits_with_budget_code() {
    let out = run(&["rank", "--input", path_str(&fixture("b4.tree")), "--budget-approx", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
}

#[test]
fn violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.tree");
    std::fs::write(&broken, "tree N=2 H=3\ngnode 1 t=0 v=0,1\n").unwrap();
    let out = run(&["validate", "--input", path_str(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("violation"));
}

#[test]
fn force_pipeline_emits_a_family() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.txt");
    let out = run(&[
        "force",
        "--input",
        path_str(&fixture("empty6.model")),
        "--out",
        path_str(&family),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}{}", text(&out.stdout), text(&out.stderr));
    let report = text(&out.stdout);
    assert!(report.contains("ok certificates"));
    assert!(!report.contains("FAIL"));
    let f = io::parse_family(&io::read_file(&family).unwrap()).unwrap();
    assert_eq!(f.family.len(), 6);
    assert_eq!(f.first_level.len(), 15);
}

#[test]
fn outputs_are_deterministic_and_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("path4.model");
    let oracle = dir.path().join("oracle.txt");
    let a = run(&["model-rank", "--input", path_str(&model)]);
    let b = run(&["model-rank", "--input", path_str(&model), "--out", path_str(&oracle)]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(text(&a.stdout), io::read_file(&oracle).unwrap());
    let back = run(&["validate", "--input", path_str(&oracle), "--input", path_str(&model)]);
    assert_eq!(back.status.code(), Some(0), "{}", text(&back.stdout));

    let scene = dir.path().join("scene.txt");
    let out = run(&["realize", "--input", path_str(&fixture("pairs.cm")), "--out", path_str(&scene)]);
    assert_eq!(out.status.code(), Some(0));
    let first = io::read_file(&scene).unwrap();
    run(&["realize", "--input", path_str(&fixture("pairs.cm")), "--out", path_str(&scene)]);
    assert_eq!(io::read_file(&scene).unwrap(), first);
    let sweep = run(&["defect-sweep", "--input", path_str(&scene)]);
    assert_eq!(sweep.status.code(), Some(0), "{}", text(&sweep.stdout));
}

#[test]
fn universal_and_embedding_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.txt");
    let out = run(&["build-universal", "--gamma", "2", "--height", "4", "--out", path_str(&u)]);
    assert_eq!(out.status.code(), Some(0));
    let back = run(&["validate", "--input", path_str(&u)]);
    assert_eq!(back.status.code(), Some(0), "{}", text(&back.stdout));
    assert!(text(&back.stdout).contains("ok ranked"));

    let corpus = dir.path().join("c.btree");
    let out = run(&["corpus", "--seed", "5", "--height", "3", "--out", path_str(&corpus)]);
    assert_eq!(out.status.code(), Some(0));
    let emb = run(&["embed", "--input", path_str(&corpus)]);
    assert_eq!(emb.status.code(), Some(0), "{}", text(&emb.stderr));
    assert!(text(&emb.stderr).contains("ok embedding"));
    let e = io::parse_embedding(&text(&emb.stdout)).unwrap();
    assert!(!e.embedding.f.is_empty() && !e.phi.is_empty());
}

#[test]
fn out_dir_override_relocates_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_colorank"))
        .args(["rank", "--input", path_str(&fixture("b4.btree")), "--out", "ranks.txt"])
        .env("COLORANK_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(io::read_file(&dir.path().join("ranks.txt")).unwrap().starts_with("rktree 3\n"));
}
