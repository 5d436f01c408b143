use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fenopt::analysis::export::{read_rows, read_solution_summaries};
use fenopt::analysis::{ConvergenceRow, SolutionRow};
use fenopt::building::BuildingModel;
use fenopt::catalog::{enumerate_compositions, Catalog, Orientation};
use serde_json::{json, Value};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn fenopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fenopt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, extra: Value) -> PathBuf {
    let mut cfg = json!({
        "location": "madrid",
        "scenario": "S1",
        "weather": data("weather/madrid.epw"),
        "geometry": data("building.json"),
        "catalog": data("catalog.json"),
        "search": {"hybrid": {"pop_size": 10}},
        "budget": 40,
        "runs": 2,
        "output": "out",
    });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join("campaign.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_a_complete_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({}));
    let o = fenopt(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["manifest.json", "runs/run_00.json", "runs/run_01.json", "solutions.csv", "solutions.json",
        "convergence.csv", "robustness.csv", "frequency.csv", "best_solution.json"]
    {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["kind"], "fenestration");
    assert_eq!(manifest["label"], "madrid");
    assert!(manifest["cache"]["misses"].as_u64().unwrap() <= 80);

    let summaries = read_solution_summaries(std::fs::File::open(out.join("solutions.csv")).unwrap()).unwrap();
    assert_eq!(summaries.len(), 20);
    let rows: Vec<SolutionRow> = serde_json::from_value(read_json(&out.join("solutions.json"))).unwrap();
    assert_eq!(rows.iter().map(|r| r.summary.clone()).collect::<Vec<_>>(), summaries);

    let conv: Vec<ConvergenceRow> = read_rows(std::fs::File::open(out.join("convergence.csv")).unwrap()).unwrap();
    assert_eq!(conv.len(), 40);
    assert!(conv.windows(2).all(|w| w[1].median <= w[0].median));

    let run0 = read_json(&out.join("runs/run_00.json"));
    assert_eq!(run0["evaluations"], 40);
    assert_eq!(run0["best_design"]["summary"]["rank"], 1);

    // Nothing but the artifacts is left behind.
    let stray: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(".tmp"))
        .collect();
    assert!(stray.is_empty(), "{stray:?}");
}

#[test]
fn single_short_run_respects_its_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"runs": 15, "search": {}}));
    let o = fenopt(&["run", "--config", cfg.to_str().unwrap(), "--runs", "1", "--budget", "120"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 1);
    assert!(manifest["cache"]["misses"].as_u64().unwrap() <= 120);
    assert!(!out.join("runs/run_01.json").exists());
    assert!(!out.join("robustness.csv").exists());
}

#[test]
fn parallel_runs_match_serial_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = write_config(a.path(), json!({"budget": 30, "runs": 3}));
    let cb = write_config(b.path(), json!({"budget": 30, "runs": 3}));
    assert!(fenopt(&["run", "--config", ca.to_str().unwrap()]).status.success());
    assert!(fenopt(&["run", "--config", cb.to_str().unwrap(), "--parallel", "3"]).status.success());
    for f in ["runs/run_00.json", "runs/run_01.json", "runs/run_02.json", "solutions.csv", "best_solution.json"] {
        assert_eq!(
            std::fs::read(a.path().join("out").join(f)).unwrap(),
            std::fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn missing_weather_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"weather": "nowhere/madrid.epw"}));
    let o = fenopt(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere/madrid.epw"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn duplicate_seeds_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"seeds": [4, 4]}));
    assert_eq!(fenopt(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failing_evaluator_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"evaluator": {"kind": "external", "program": "false"}}));
    let o = fenopt(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("out/manifest.json").exists());
}

#[test]
fn inspect_prints_the_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"runs": 1}));
    assert!(fenopt(&["run", "--config", cfg.to_str().unwrap()]).status.success());
    let path = dir.path().join("out/best_solution.json");
    let o = fenopt(&["inspect", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for field in ["ED_Heating", "ED_Cooling", "ED_Heating+Cooling", "NCT", "WWR", "K", "Q_sol,Jul", "Width", "Height",
        "Area", "Glazing Composition", "Window U-value", "Frame Material", "Shading Control"]
    {
        assert!(text.contains(field), "{field} missing from\n{text}");
    }

    // WWR is window area over façade area, in percent.
    let row: SolutionRow = serde_json::from_value(read_json(&path)).unwrap();
    let building = BuildingModel::load(data("building.json")).unwrap();
    let wall: f64 = building.facades.iter().map(|f| f.gross_area_m2()).sum();
    let windows: f64 = row.design.windows.iter().map(|w| w.size.area_m2()).sum();
    let wwr = 100.0 * windows / wall;
    assert!(text.contains(&format!("WWR                  {wwr:.2} %")), "{text}");

    // A run record with a best design is accepted too.
    let run = dir.path().join("out/runs/run_00.json");
    assert!(fenopt(&["inspect", run.to_str().unwrap()]).status.success());
}

#[test]
fn malformed_solution_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"summary\": ").unwrap();
    let o = fenopt(&["inspect", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json"));
}

#[test]
fn catalog_listing_matches_the_rule_engine() {
    let path = data("catalog.json");
    let catalog = Catalog::load(&path).unwrap();
    let o = fenopt(&["catalog", "--catalog", path.to_str().unwrap(), "--orientation", "N", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("orientation,code,u_g,shgc,vt"));
    assert_eq!(lines.count(), enumerate_compositions(&catalog, Orientation::N).len());

    let o = fenopt(&["catalog", "--catalog", path.to_str().unwrap()]);
    let text = stdout(&o);
    for orientation in Orientation::ALL {
        let n = enumerate_compositions(&catalog, orientation).len();
        assert!(text.contains(&format!("{orientation}: {n} compositions")), "{text}");
    }
}

#[test]
fn empty_catalog_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, r#"{"glasses": [], "gaps": [], "frames": []}"#).unwrap();
    let o = fenopt(&["catalog", "--catalog", path.to_str().unwrap(), "--orientation", "S"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "S: 0 compositions");
}

fn bench(dir: &Path, name: &str, algorithm: &str, budget: &str) -> PathBuf {
    let out = dir.join(name);
    let o = fenopt(&["bench", "--function", "sphere", "--dim", "4", "--budget", budget, "--runs", "6",
        "--algorithm", algorithm, "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn compare_rows(csv: &Path) -> Vec<std::collections::HashMap<String, String>> {
    read_rows(std::fs::File::open(csv).unwrap()).unwrap()
}

#[test]
fn compare_benchmark_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let a = bench(dir.path(), "hybrid", "hybrid", "400");
    let b = bench(dir.path(), "ga", "ga", "400");
    let csv = dir.path().join("cmp.csv");
    let o = fenopt(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = compare_rows(&csv);
    assert_eq!(rows.len(), 1);
    let p: f64 = rows[0]["p_value"].parse().unwrap();
    assert!(p > 0.0 && p <= 1.0);

    let o = fenopt(&["compare", a.to_str().unwrap(), a.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = compare_rows(&csv);
    assert!((rows[0]["p_value"].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(rows[0]["significant"], "false");
}

#[test]
fn compare_three_locations_splits_alpha() {
    let dir = tempfile::tempdir().unwrap();
    for side in ["a", "b"] {
        for loc in ["leon", "madrid", "sevilla"] {
            let algorithm = if side == "a" { "hybrid" } else { "ga" };
            bench(&dir.path().join(side), loc, algorithm, "300");
        }
    }
    let csv = dir.path().join("cmp.csv");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = fenopt(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = compare_rows(&csv);
    assert_eq!(rows.iter().map(|r| r["label"].as_str()).collect::<Vec<_>>(), ["leon", "madrid", "sevilla"]);
    for r in &rows {
        assert!((r["threshold"].parse::<f64>().unwrap() - 0.01 / 3.0).abs() < 1e-12);
    }
    assert!(stdout(&o).contains("0.0033"));
}

#[test]
fn compare_rejects_mismatched_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let a = bench(dir.path(), "short", "hybrid", "300");
    let b = bench(dir.path(), "long", "hybrid", "400");
    let o = fenopt(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("different budgets"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(fenopt(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fenopt(&["--help"]).status.code(), Some(0));
}
