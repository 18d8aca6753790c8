use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qbranch::bnp::{RunReport, REPORT_SCHEMA};
use qbranch::ilp::{Route, SetPartitioningInstance};
use tempfile::TempDir;

fn qbranch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbranch"))
        .args(args)
        .env("QBRANCH_THREADS", "1")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn network(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/networks").join(format!("{name}.json"))
}

#[test]
fn generate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        let out = qbranch(&["generate", "--routes", "6", "--solutions", "3", "--seed", "4", "--out", s(path)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.stats.json")).unwrap(),
        std::fs::read(dir.path().join("b.stats.json")).unwrap()
    );
    let inst = SetPartitioningInstance::load(&a).unwrap();
    assert_eq!(inst.brute_force_solve().unwrap().len(), 3);
}

#[test]
fn impossible_generation_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = qbranch(&["generate", "--routes", "6", "--solutions", "9", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&qbranch(&["generate", "--routes"])), 2);
}

#[test]
fn qaoa_writes_one_row_per_depth() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("i.json");
    qbranch(&["generate", "--routes", "5", "--solutions", "2", "--out", s(&inst)]);
    let csv = dir.path().join("ladder.csv");
    let out = qbranch(&["qaoa", "--instance", s(&inst), "--f", "inf", "--pmax", "3", "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
    assert_eq!(code(&qbranch(&["qaoa", "--instance", s(&inst), "--f", "0"])), 2);
}

#[test]
fn single_route_reaches_certainty_at_depth_one() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("one.json");
    SetPartitioningInstance::new(1, vec![Route::new(vec![0], 3)], None)
        .unwrap()
        .save(&path)
        .unwrap();
    let out = qbranch(&["qaoa", "--instance", s(&path), "--f", "inf", "--pmax", "1"]);
    assert_eq!(code(&out), 0);
    let mut rows = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rows.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "P_EC").unwrap();
    let row = rows.records().next().unwrap().unwrap();
    let p: f64 = row[col].parse().unwrap();
    assert!((p - 1.0).abs() < 1e-9, "{p}");
}

#[test]
fn qubit_guard_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("big.json");
    let routes = (0..25).map(|r| Route::new(vec![r], 1)).collect();
    SetPartitioningInstance::new(25, routes, None).unwrap().save(&path).unwrap();
    let out = qbranch(&["qaoa", "--instance", s(&path), "--f", "inf", "--pmax", "1"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_resumes_and_writes_wide_table() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    qbranch(&["generate", "--routes", "4", "--solutions", "1", "--seed", "1", "--out", s(&a)]);
    qbranch(&["generate", "--routes", "5", "--solutions", "2", "--seed", "2", "--out", s(&b)]);
    let cells = dir.path().join("cells.csv");
    let sweep = |instances: &[&Path]| {
        let mut args = vec!["sweep", "--f", "1,inf", "--pmax", "2", "--out", s(&cells), "--instance"];
        args.extend(instances.iter().map(|p| s(p)));
        let out = qbranch(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    };
    sweep(&[&a]);
    let first = std::fs::read_to_string(&cells).unwrap();
    assert_eq!(first.lines().count(), 1 + 2);
    sweep(&[&a, &b]);
    let second = std::fs::read_to_string(&cells).unwrap();
    assert!(second.starts_with(&first));
    assert_eq!(second.lines().count(), 1 + 4);

    let table = std::fs::read_to_string(dir.path().join("cells.table.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert!(header.contains("P_EC[f=1]") && header.contains("P_EC[f=inf]"), "{header}");
    assert!(header.contains("P_SP[f=1]") && header.contains("P_SP[f=inf]"), "{header}");
    assert_eq!(table.lines().count(), 1 + 2);
}

#[test]
fn bnp_report_matches_schema() {
    let dir = TempDir::new().unwrap();
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let mut nodes = Vec::new();
    for heuristic in ["none", "mock-exact"] {
        let out_path = dir.path().join(format!("{heuristic}.json"));
        let out = qbranch(&[
            "bnp",
            "--network",
            s(&network("tail9")),
            "--heuristic",
            heuristic,
            "--policy",
            "always",
            "--out",
            s(&out_path),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        assert!(jsonschema::is_valid(&schema, &json));
        let report: RunReport = serde_json::from_value(json).unwrap();
        assert_eq!(report.heuristic, heuristic);
        nodes.push((report.cost, report.stats.nodes_created));
    }
    assert_eq!(nodes[0].0, nodes[1].0);
    assert!(nodes[1].1 <= nodes[0].1);
}

#[test]
fn bnp_dive_mode_runs() {
    let out = qbranch(&["bnp", "--network", s(&network("toy6")), "--mode", "dive"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.cost.is_some());
}
