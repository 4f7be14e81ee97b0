use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bopco::export::{FrontDocument, CSV_HEADER};
use bopco_bench::{fixture_path, load_fixture};
use serde_json::Value;

fn bopco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bopco"))
        .args(args)
        .output()
        .expect("run bopco")
}

fn frame() -> String {
    fixture_path("frame").display().to_string()
}

fn optimize(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["optimize".to_string(), frame(), "--out".into(), out.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    bopco(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(optimize(&a, &["--seed", "3"]).status.success());
    assert!(optimize(&b, &["--seed", "3", "--threads", "2"]).status.success());
    let csv = fs::read(a.join("front.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("front.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert!(text.lines().count() > 1);
}

#[test]
fn front_json_plans_revalidate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(optimize(dir.path(), &["--dot"]).status.success());
    let doc = FrontDocument::from_json(&fs::read_to_string(dir.path().join("front.json")).unwrap()).unwrap();
    assert!(!doc.solutions.is_empty());
    doc.revalidate(&load_fixture("frame")).unwrap();
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["n_iter"].as_u64().unwrap() >= 1);
    assert!(fs::read_to_string(dir.path().join("egraph.dot")).unwrap().starts_with("digraph"));
}

#[test]
fn config_and_param_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"seed": 5, "alpha": 0.5, "t_d": 2}"#).unwrap();
    let out = optimize(dir.path(), &["--config", config.to_str().unwrap(), "--param", "mt_d=3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["params"]["alpha"], 0.5);
    assert_eq!(report["params"]["t_d"], 2);
    assert_eq!(report["params"]["mt_d"], 3);
    assert!(report["n_iter"].as_u64().unwrap() <= 3);
}

#[test]
fn stats_reports_the_design_space() {
    let out = bopco(&["stats", &frame()]);
    assert!(out.status.success());
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["assignments"], "81");
    assert_eq!(stats["unique_bops"], 13);
    assert_eq!(stats["params"]["k_d"], 4);
}

#[test]
fn export_dot_after_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let out = bopco(&["export-dot", &frame(), "--iterations", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("egraph.dot")).unwrap().contains("->"));
}

#[test]
fn parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(bopco(&["optimize", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bopco(&["optimize", &frame(), "--param", "t_d"]).status.code(), Some(1));
    assert_eq!(bopco(&["optimize", &frame(), "--param", "nope=1"]).status.code(), Some(1));
    assert_eq!(bopco(&["optimize", &frame(), "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(bopco(&["optimize", &frame(), "--bogus"]).status.code(), Some(1));
    assert_eq!(bopco(&["stats", "/nonexistent/model.json"]).status.code(), Some(1));
}

#[test]
fn infeasible_models_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let long = dir.path().join("long.json");
    fs::write(
        &long,
        r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 5000}}, "material": "pine"}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 1, "kerf": 2, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10, "base_error": 0.5}]
        }"#,
    )
    .unwrap();
    let out = bopco(&["optimize", long.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let no_stock = dir.path().join("no_stock.json");
    fs::write(
        &no_stock,
        r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 50}}, "material": "oak"}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 1, "kerf": 2, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10, "base_error": 0.5}]
        }"#,
    )
    .unwrap();
    assert_eq!(bopco(&["stats", no_stock.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn compare_writes_both_fronts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bopco(&["compare", &frame(), "--param", "mt_d=3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert!(c["ours_hypervolume"].as_f64().unwrap() > 0.0);
    assert!(c["baseline_hypervolume"].as_f64().unwrap() > 0.0);
    for f in ["comparison.csv", "front.csv", "baseline_front.csv", "front.json", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
