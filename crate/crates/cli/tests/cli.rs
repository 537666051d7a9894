//! End-to-end checks of the compiled binary: determinism of generated
//! suites and reports, exit codes, and csv/json value equivalence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn om() -> Command {
    Command::new(env!("CARGO_BIN_EXE_om"))
}

fn run(args: &[&str]) -> Output {
    om().args(args).output().expect("binary runs")
}

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    for (dir, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = run(&[
            "simulate",
            "--out",
            dir.to_str().unwrap(),
            "--runs",
            "10",
            "--seed",
            seed,
            "--jitter",
            "0.002",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(tree_bytes(&a), tree_bytes(&b), "same seed, same bytes");
    assert_ne!(tree_bytes(&a), tree_bytes(&c), "different seed differs");
}

#[test]
fn metrics_stage_emits_one_row_per_run() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("suite");
    let out_dir = tmp.path().join("reports");
    assert!(run(&[
        "simulate",
        "--out",
        root.to_str().unwrap(),
        "--runs",
        "9",
        "--seed",
        "3"
    ])
    .status
    .success());
    let out = run(&[
        "metrics",
        "--dataset-root",
        root.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("run_metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9, "header plus one row per run");
}

#[test]
fn report_formats_encode_identical_values() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("suite");
    assert!(run(&[
        "simulate",
        "--out",
        root.to_str().unwrap(),
        "--runs",
        "8",
        "--seed",
        "11",
        "--threshold",
        "1.0"
    ])
    .status
    .success());

    let csv_dir = tmp.path().join("csv");
    let json_dir = tmp.path().join("json");
    for (dir, format) in [(&csv_dir, "csv"), (&json_dir, "json")] {
        let out = run(&[
            "metrics",
            "--dataset-root",
            root.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--format",
            format,
        ]);
        assert!(out.status.success());
    }

    let csv = std::fs::read_to_string(csv_dir.join("run_metrics.csv")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json_dir.join("run_metrics.json")).unwrap())
            .unwrap();
    let rows = json.as_array().unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let duration_col = header.iter().position(|c| *c == "time_duration_s").unwrap();
    let missed_col = header
        .iter()
        .position(|c| *c == "n_missed_objects")
        .unwrap();
    for (line, row) in lines.zip(rows) {
        let fields: Vec<&str> = line.split(',').collect();
        let csv_duration: f64 = fields[duration_col].parse().unwrap();
        assert_eq!(row["time_duration_s"].as_f64().unwrap(), csv_duration);
        let csv_missed: i64 = fields[missed_col].parse().unwrap();
        assert_eq!(row["n_missed_objects"].as_i64().unwrap(), csv_missed);
    }
}

#[test]
fn behavior_stage_writes_missed_obj_info() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("suite");
    let out_dir = tmp.path().join("reports");
    assert!(run(&[
        "simulate",
        "--out",
        root.to_str().unwrap(),
        "--runs",
        "6",
        "--seed",
        "2",
        "--threshold",
        "100.0"
    ])
    .status
    .success());
    assert!(run(&[
        "behavior",
        "--dataset-root",
        root.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ])
    .status
    .success());
    let info = std::fs::read_to_string(out_dir.join("missed_obj_info.txt")).unwrap();
    // Threshold far above any luminance: all 9 objects missed in each run.
    assert_eq!(info.lines().count(), 1 + 6 * 9);
    assert!(out_dir.join("crosstab_grey_by_light.csv").exists());
}

#[test]
fn exit_codes() {
    // Usage error: unknown subcommand.
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // Data error: dataset root without a summary.
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["metrics", "--dataset-root", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // Success.
    let out = run(&["photometry", "--grey", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.438");
}

#[test]
fn photometry_grey_out_of_span_fails() {
    let out = run(&["photometry", "--grey", "200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extrapolate"));
}
