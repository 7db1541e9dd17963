use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use twoplanar::conll::write_conll_file;
use twoplanar::synthetic::{synthetic_treebank, SyntheticConfig};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoplanar"))
        .args(args)
        .env_remove("PARSER_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn treebank(dir: &Path, name: &str, count: usize, seed: u64) -> String {
    let path = dir.join(name);
    write_conll_file(&path, &synthetic_treebank(count, &SyntheticConfig::default(), seed)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn unknown_flags_exit_with_usage() {
    let o = run(&["eval", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn eval_against_itself_is_perfect() {
    let dir = TempDir::new().unwrap();
    let gold = treebank(dir.path(), "gold.conll", 20, 1);
    let o = run(&["eval", "--gold", &gold, "--pred", &gold]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("UAS 100.00\nLAS 100.00\n"), "{}", text);
    let o = run(&["--json", "eval", "--gold", &gold, "--pred", &gold, "--exclude-punct"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["uas"], 100.0);
    assert!(v["tokens_excluded"].as_u64().unwrap() > 0);
}

#[test]
fn missing_files_fail_cleanly() {
    let o = run(&["eval", "--gold", "/nonexistent.conll", "--pred", "/nonexistent.conll"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn train_parse_and_significance() {
    let dir = TempDir::new().unwrap();
    let train = treebank(dir.path(), "train.conll", 60, 2);
    let dev = treebank(dir.path(), "dev.conll", 20, 3);
    let model = dir.path().join("m.bin");
    let model = model.to_str().unwrap();
    let o = run(&[
        "train", "--train", &train, "--dev", &dev, "--system", "2planar", "--oracle", "dynamic", "--iters", "15",
        "--seed", "4", "--model", model,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("dev UAS")).count(), 16);
    assert_eq!(text.lines().filter(|l| l.starts_with("iteration ")).count(), 15);

    let pred = dir.path().join("pred.conll");
    let pred = pred.to_str().unwrap();
    let o = run(&["parse", "--model", model, "--input", &dev, "--output", pred, "--trace"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("STEP 0: "));
    let o = run(&["eval", "--gold", &dev, "--pred", pred]);
    assert!(o.status.success());

    let args = ["significance", "--gold", &dev, "--pred-a", &dev, "--pred-b", pred, "--samples", "500"];
    let first = run(&[&args[..], &["--seed", "5"]].concat());
    let second = run(&args);
    assert!(first.status.success());
    let with_env = Command::new(env!("CARGO_BIN_EXE_twoplanar"))
        .args(args)
        .env("PARSER_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(stdout(&first), stdout(&with_env));
    assert!(stdout(&first).contains("seed 5"));
    assert!(stdout(&second).contains("seed 1"));
}

#[test]
fn hybrid_training_writes_json_lines() {
    let dir = TempDir::new().unwrap();
    let train = treebank(dir.path(), "train.conll", 30, 6);
    let model = dir.path().join("h.bin");
    let o = run(&[
        "--json", "train", "--train", &train, "--dev", &train, "--system", "hybrid-swap", "--oracle", "static",
        "--iters", "2", "--model", model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["iteration"], 2);
}

#[test]
fn oracle_verify_passes() {
    let o = run(&["oracle-verify", "--max-len", "6", "--samples", "10000", "--seed", "1"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("2planar: configurations"));
    assert!(text.contains("hybrid-swap: configurations"));
    assert!(text.contains("failures 0"));
}

#[test]
fn oracle_verify_rejects_long_sentences() {
    let o = run(&["oracle-verify", "--max-len", "30", "--system", "2planar"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn planarity_stats_reports_rates() {
    let dir = TempDir::new().unwrap();
    let data = treebank(dir.path(), "data.conll", 100, 7);
    let o = run(&["planarity-stats", "--input", &data]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2-planar 100.00%"), "{}", stdout(&o));
    let o = run(&["--json", "planarity-stats", "--input", &data]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["sentences"], 100);
}
