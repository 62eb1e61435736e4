use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gsim(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn dataset(dir: &Path, count: &str) {
    ok(dir, &["--out", "data", "gen-data", "--count", count]);
}

#[test]
fn gen_data_writes_graphs_and_index() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "5");
    let index = json(tmp.path().join("data/index.json"));
    assert_eq!(index["count"], 5);
    assert_eq!(index["graphs"].as_array().unwrap().len(), 5);
    assert!(tmp.path().join("data/graph_00004.json").exists());
}

#[test]
fn gen_data_zero_count_gives_empty_index() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "0");
    let index = json(tmp.path().join("data/index.json"));
    assert_eq!(index["graphs"].as_array().unwrap().len(), 0);
    let out = gsim(tmp.path(), &["compare", "--dataset", "data"]);
    assert!(!out.status.success());
}

#[test]
fn run_reports_score_cycles_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "2");
    let stdout = ok(
        tmp.path(),
        &["--out", "r", "--validate", "--dump-edge-stream", "run", "data/graph_00000.json", "data/graph_00001.json"],
    );
    assert!(stdout.contains("score") && stdout.contains("abs_delta"));
    let report = json(tmp.path().join("r/report.json"));
    let score = report["score"].as_f64().unwrap();
    let golden = report["golden_score"].as_f64().unwrap();
    assert!((score - golden).abs() <= 1e-4 * golden);
    assert!(report["report"]["total_kernel_cycles"].as_u64().unwrap() > 0);
    assert_eq!(report["manifest"]["command"], "run");
    assert_eq!(report["manifest_sha256"].as_str().unwrap().len(), 64);
    let edges = fs::read_to_string(tmp.path().join("r/edges_g1.csv")).unwrap();
    assert!(edges.lines().count() > 1);
}

#[test]
fn run_csv_writes_module_table() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "2");
    ok(
        tmp.path(),
        &["--out", "r", "--format", "csv", "--config", "baseline", "run", "data/graph_00000.json", "data/graph_00001.json"],
    );
    let csv = fs::read_to_string(tmp.path().join("r/report.csv")).unwrap();
    assert!(csv.starts_with("module,active,bubble,idle"));
    assert!(tmp.path().join("r/manifest.json").exists());
}

#[test]
fn mismatched_model_fails() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "2");
    ok(tmp.path(), &["--out", "m", "model", "new"]);
    let mut model = json(tmp.path().join("m/model.json"));
    // Drop the first GCN layer so the shapes no longer chain from 29 inputs.
    model["gcn"].as_array_mut().unwrap().remove(0);
    fs::write(tmp.path().join("bad.json"), model.to_string()).unwrap();
    let out = gsim(
        tmp.path(),
        &["run", "data/graph_00000.json", "data/graph_00001.json", "--model", "bad.json"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_config_fails() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "2");
    let out = gsim(
        tmp.path(),
        &["--config", "nonexistent", "run", "data/graph_00000.json", "data/graph_00001.json"],
    );
    assert!(!out.status.success());
}

#[test]
fn compare_same_config_twice_has_unit_speedup() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "6");
    ok(tmp.path(), &["--out", "c", "compare", "--dataset", "data", "--configs", "pipelined", "pipelined"]);
    let csv = fs::read_to_string(tmp.path().join("c/compare.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.split(',').nth(4), Some("1.0000"));
    }
}

#[test]
fn compare_needs_two_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gsim(tmp.path(), &["compare", "--configs", "sparse"]);
    assert!(!out.status.success());
}

#[test]
fn compare_default_presets_order() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "10");
    ok(tmp.path(), &["--out", "c", "compare", "--dataset", "data"]);
    let report = json(tmp.path().join("c/compare.json"));
    let rows = report["rows"].as_array().unwrap();
    let cycles: Vec<f64> = rows.iter().map(|r| r["mean_cycles"].as_f64().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(cycles[0] > cycles[1] && cycles[0] > cycles[2]);
}

#[test]
fn batch_curve_starts_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "4");
    ok(tmp.path(), &["--out", "b", "batch", "--dataset", "data", "--sizes", "1,10,300"]);
    let csv = fs::read_to_string(tmp.path().join("b/batch.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "batch_size,avg_cycles_per_query,speedup_vs_batch1");
    assert!(lines[1].starts_with("1,") && lines[1].ends_with(",1.0000"));
    assert_eq!(lines.len(), 4);
    assert!(tmp.path().join("b/batch.json").exists());
}

#[test]
fn batch_rejects_zero_size() {
    let tmp = tempfile::tempdir().unwrap();
    dataset(tmp.path(), "2");
    let out = gsim(tmp.path(), &["batch", "--dataset", "data", "--sizes", "0"]);
    assert!(!out.status.success());
}

#[test]
fn model_new_and_inspect_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let created = ok(tmp.path(), &["--out", "m", "--seed", "3", "model", "new"]);
    let inspected = ok(tmp.path(), &["model", "inspect", "m/model.json"]);
    assert!(inspected.contains("dims [29, 64, 32, 16]"));
    let sha = inspected.lines().find(|l| l.starts_with("sha256")).unwrap();
    assert!(created.contains(sha));
    let other = ok(tmp.path(), &["--out", "m2", "--seed", "4", "model", "new"]);
    assert!(!other.contains(sha));
}

#[test]
fn seed_changes_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["--out", "a", "--seed", "1", "gen-data", "--count", "3"]);
    ok(tmp.path(), &["--out", "b", "--seed", "2", "gen-data", "--count", "3"]);
    let a = fs::read(tmp.path().join("a/graph_00000.json")).unwrap();
    let b = fs::read(tmp.path().join("b/graph_00000.json")).unwrap();
    assert_ne!(a, b);
}
