#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_rationale");

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn golden_config() -> PathBuf {
    repo_root().join("configs/golden.toml")
}

pub fn golden_report() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report.md")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Runs and requires exit 0, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "rationale {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// The reference pipeline (same steps as scripts/golden.sh).
pub fn run_golden(dir: &Path, jobs: usize) {
    let cfg = golden_config();
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let jobs = jobs.to_string();
    let base = ["--config", cfg.to_str().unwrap(), "--jobs", jobs.as_str()];
    let step = |rest: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(rest);
        ok(&args);
    };
    let (corpus, split, planted) = (p("corpus.jsonl"), p("split.json"), p("planted.markup.json"));
    let test = ["--split", split.as_str(), "--part", "test"];
    step(&["gen-synthetic", "--seed", "7", "--out-dir", dir.to_str().unwrap()]);
    step(&[
        "train", "--corpus", &corpus, "--split", &split, "--labels", &p("labels.txt"), "--out", &p("model.ckpt"),
        "--log", &p("train.log.jsonl"),
    ]);
    let with_test = |head: &[&str], tail: &[&str]| {
        let mut v: Vec<&str> = head.to_vec();
        v.extend_from_slice(&test);
        v.extend_from_slice(tail);
        step(&v);
    };
    with_test(
        &["eval", "--model", &p("model.ckpt"), "--corpus", &corpus],
        &["--name", "fact-only", "--out", &p("eval.json")],
    );
    with_test(&["attribute", "--model", &p("model.ckpt"), "--corpus", &corpus], &["--out", &p("test.attr.json")]);
    with_test(
        &["binarize", "--attrs", &p("test.attr.json"), "--like", &planted, "--corpus", &corpus],
        &["--out", &p("model.markup.json")],
    );
    with_test(
        &["hard-derive", "--corpus", &corpus, "--summaries", &p("summary.jsonl")],
        &["--out", &p("hard.markup.json")],
    );
    with_test(
        &["binarize", "--random", "--like", &planted, "--corpus", &corpus],
        &["--out", &p("random.markup.json")],
    );
    for (m, name) in [("model", "fact-only"), ("hard", "hard"), ("random", "random")] {
        with_test(
            &["align", "--model", &p(&format!("{m}.markup.json")), "--expert", &planted, "--corpus", &corpus],
            &["--name", name, "--out", &p(&format!("align.{m}.json"))],
        );
    }
    step(&["proxy-stats", "--kappas", &p("align.model.json"), "--corpus", &corpus, "--out", &p("proxy.json")]);
    step(&[
        "report", "--inputs", &p("eval.json"), &p("align.model.json"), &p("align.hard.json"), &p("align.random.json"),
        &p("proxy.json"), "--out", &p("report.md"),
    ]);
}

/// Names of files in `a` whose bytes differ from the same name in `b`.
pub fn differing_files(a: &Path, b: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
        .into_iter()
        .filter(|n| std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok())
        .collect()
}
