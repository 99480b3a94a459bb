//! End-to-end runs of the installed binary over temp files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treequery"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tqcli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const T1_D1: &str = "5 1\n1 2 2 1\n3\n1\n5\n2\n4\n";
const T1_D2: &str = "5 2\n1 2 2 1\n3 2\n1 5\n5 1\n2 4\n4 3\n";

#[test]
fn query_fixtures() {
    let dir = scratch("fixtures");
    let t1 = write(&dir, "t1.tree", T1_D1);
    let q1 = write(&dir, "q1.txt", "count 3 5 2 4\nsucc 3 5 2\nreport 3 5 2 4\nsucc 1 1 6\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&t1)
        .arg("--queries")
        .arg(&q1)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "2\n1\n1 5\n-\n");

    let t2 = write(&dir, "t2.tree", T1_D2);
    let q2 = write(&dir, "q2.txt", "dom 4 1 3\ndom 4 6 1\ncount 3 5 2 4 1 5\n");
    for variant in ["theorem1", "theorem2"] {
        let out = bin()
            .args(["query", "--tree"])
            .arg(&t2)
            .arg("--queries")
            .arg(&q2)
            .args(["--variant", variant])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stdout(&out), "2 4\n\n2\n", "variant {variant}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn raw_weights_are_snapped() {
    let dir = scratch("snap");
    // same tree as t1 but weights scaled and shifted, with one tie
    let t = write(&dir, "raw.tree", "5 1\n1 2 2 1\n30\n-7\n500\n-7\n41\n");
    // raw [0, 45] covers {30, 41}: nodes 1 and 5; ties at -7 resolve by
    // preorder so node 2 outranks node 4
    let q = write(&dir, "q.txt", "report 3 5 0 45\nsucc 3 5 -100\ncount 4 5 -7 -7\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&t)
        .arg("--queries")
        .arg(&q)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "1 5\n2\n2\n");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn generate_is_deterministic_and_verifies() {
    let dir = scratch("gen");
    let t = dir.join("g.tree");
    let q = dir.join("g.q");
    for _ in 0..2 {
        let out = bin()
            .args(["generate", "--n", "24", "--d", "2", "--seed", "7", "--shape", "caterpillar"])
            .arg("--out")
            .arg(&t)
            .args(["--queries", "40"])
            .arg("--queries-out")
            .arg(&q)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let first = std::fs::read_to_string(&t).unwrap();
    let out = bin()
        .args(["generate", "--n", "24", "--d", "2", "--seed", "7", "--shape", "caterpillar"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), first, "regeneration changed the tree");

    let out = bin()
        .args(["verify", "--tree"])
        .arg(&t)
        .arg("--queries-file")
        .arg(&q)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("ok: 40 queries verified"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_generated_corpora() {
    for (n, d, shape) in [("50", "2", "random"), ("17", "3", "path"), ("31", "1", "star")] {
        let out = bin()
            .args(["verify", "--n", n, "--d", d, "--shape", shape, "--seed", "3"])
            .args(["--queries", "200", "--variant", "theorem2"])
            .output()
            .unwrap();
        assert!(out.status.success(), "n={n} d={d}: {}", stderr(&out));
        assert!(stdout(&out).starts_with("ok: 200 queries verified"));
    }
}

#[test]
fn built_index_answers_like_the_tree() {
    let dir = scratch("build");
    let t = dir.join("c.tree");
    let q = dir.join("c.q");
    let idx = dir.join("c.idx");
    let out = bin()
        .args(["generate", "--n", "40", "--d", "2", "--seed", "12"])
        .arg("--out")
        .arg(&t)
        .args(["--queries", "60"])
        .arg("--queries-out")
        .arg(&q)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let out = bin()
        .args(["build", "--tree"])
        .arg(&t)
        .arg("--out")
        .arg(&idx)
        .args(["--variant", "theorem2", "--branching", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("index written"));

    let via_tree = bin()
        .args(["query", "--tree"])
        .arg(&t)
        .arg("--queries")
        .arg(&q)
        .args(["--variant", "theorem2", "--branching", "3"])
        .output()
        .unwrap();
    let via_index = bin()
        .args(["query", "--index"])
        .arg(&idx)
        .arg("--queries")
        .arg(&q)
        .output()
        .unwrap();
    assert!(via_tree.status.success() && via_index.status.success());
    assert_eq!(stdout(&via_tree), stdout(&via_index));
    assert!(!stdout(&via_tree).is_empty());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn errors_carry_line_numbers() {
    let dir = scratch("errors");
    // parent line too short
    let bad = write(&dir, "bad.tree", "5 1\n1 2 2\n3\n1\n5\n2\n4\n");
    let q = write(&dir, "q.txt", "count 1 1 1 1\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&bad)
        .arg("--queries")
        .arg(&q)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let good = write(&dir, "good.tree", T1_D1);
    let badq = write(&dir, "badq.txt", "count 1 1 1 1\nwalk 1 2\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&good)
        .arg("--queries")
        .arg(&badq)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    // wrong arity for d=1
    let badq2 = write(&dir, "badq2.txt", "count 1 1 1 1 2 2\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&good)
        .arg("--queries")
        .arg(&badq2)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    // dominance needs a second dimension
    let domq = write(&dir, "domq.txt", "dom 3 2\n");
    let out = bin()
        .args(["query", "--tree"])
        .arg(&good)
        .arg("--queries")
        .arg(&domq)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bench_emits_csv() {
    let out = bin()
        .args(["bench", "--n", "30", "--d", "2", "--seed", "5", "--queries", "12"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines[0], "query_kind,n,d,variant,time_ns,child_queries,probes,k");
    assert_eq!(lines.len(), 13);
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 8, "{row}");
    }
    assert!(lines[1..].iter().any(|r| r.starts_with("count,30,2,-,")));
    assert!(lines[1..]
        .iter()
        .any(|r| r.starts_with("dom,30,2,theorem1,")));
}
