use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::Args;
use fenopt::analysis::{bonferroni, quantile, wilcoxon_rank_sum, AnalysisError, Method};
use serde::{Deserialize, Serialize};

use super::csv_bytes;
use crate::error::config;
use crate::output::{write_atomic, Manifest, MANIFEST};

#[derive(Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Family-wise significance level, split over the compared pairs.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Where to write the comparison table as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub q25_a: f64,
    pub q75_a: f64,
    pub median_b: f64,
    pub q25_b: f64,
    pub q75_b: f64,
    /// `exact`, `normal`, or `degenerate` when every value is equal.
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub significant: bool,
    /// `a`, `b`, or empty when not significant.
    pub better: String,
}

fn is_campaign(dir: &Path) -> bool {
    dir.join(MANIFEST).is_file()
}

/// Campaign pairs to compare: the two directories themselves, or their
/// subdirectories matched by name.
pub fn pair_up(a: &Path, b: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    if is_campaign(a) && is_campaign(b) {
        return Ok(vec![(String::new(), a.to_path_buf(), b.to_path_buf())]);
    }
    let mut pairs = Vec::new();
    let entries = std::fs::read_dir(a).map_err(|e| anyhow!("cannot read {}: {e}", a.display()))?;
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let (da, db) = (entry.path(), b.join(&name));
        if is_campaign(&da) && is_campaign(&db) {
            pairs.push((name, da, db));
        }
    }
    if pairs.is_empty() {
        return Err(anyhow!("no matching campaigns under {} and {}", a.display(), b.display()));
    }
    pairs.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(pairs)
}

fn check_budgets(a: &Manifest, b: &Manifest) -> Result<(), AnalysisError> {
    let spent: Vec<usize> = a.runs.iter().chain(&b.runs).map(|r| r.evaluations).collect();
    if a.budget != b.budget || a.budget_mode != b.budget_mode || spent.iter().any(|&e| e != spent[0]) {
        let mut budgets = vec![a.budget, b.budget];
        budgets.extend(spent);
        return Err(AnalysisError::MismatchedBudgets(budgets));
    }
    Ok(())
}

fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75))
}

pub fn compare_campaigns(pairs: &[(String, Manifest, Manifest)], alpha: f64) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(pairs.len());
    for (name, a, b) in pairs {
        check_budgets(a, b).map_err(config)?;
        let (va, vb) = (a.final_values(), b.final_values());
        let (method, statistic, p_value) = match wilcoxon_rank_sum(&va, &vb, Method::Auto) {
            Ok(t) => (format!("{:?}", t.method).to_lowercase(), t.statistic, t.p_value),
            Err(AnalysisError::DegenerateSamples) => ("degenerate".to_string(), f64::NAN, 1.0),
            Err(e) => return Err(config(e)),
        };
        let (q25_a, median_a, q75_a) = quartiles(&va);
        let (q25_b, median_b, q75_b) = quartiles(&vb);
        let label = if name.is_empty() { a.label.clone() } else { name.clone() };
        rows.push(ComparisonRow {
            label,
            algorithm_a: a.algorithm.clone(),
            algorithm_b: b.algorithm.clone(),
            n_a: va.len(),
            n_b: vb.len(),
            median_a,
            q25_a,
            q75_a,
            median_b,
            q25_b,
            q75_b,
            method,
            statistic,
            p_value,
            threshold: alpha / pairs.len() as f64,
            significant: false,
            better: String::new(),
        });
    }
    let flags = bonferroni(&rows.iter().map(|r| r.p_value).collect::<Vec<_>>(), alpha);
    for (r, sig) in rows.iter_mut().zip(flags) {
        r.significant = sig;
        if sig {
            r.better = if r.median_a <= r.median_b { "a" } else { "b" }.into();
        }
    }
    Ok(rows)
}

pub fn compare(args: CompareArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(config(anyhow!("alpha must lie in (0, 1)")));
    }
    let dirs = pair_up(&args.a, &args.b).map_err(config)?;
    let mut pairs = Vec::with_capacity(dirs.len());
    for (name, da, db) in dirs {
        pairs.push((name, Manifest::load(&da).map_err(config)?, Manifest::load(&db).map_err(config)?));
    }
    let rows = compare_campaigns(&pairs, args.alpha)?;
    println!(
        "{:<16} {:>12} {:>12} {:>12} {:>12} {:>10} {:>9}  {}",
        "campaign", "median A", "IQR A", "median B", "IQR B", "p", "threshold", "verdict"
    );
    for r in &rows {
        let verdict = match r.better.as_str() {
            "a" => format!("A better ({})", r.algorithm_a),
            "b" => format!("B better ({})", r.algorithm_b),
            _ => "not significant".into(),
        };
        println!(
            "{:<16} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>10.3e} {:>9.4}  {}",
            r.label,
            r.median_a,
            r.q75_a - r.q25_a,
            r.median_b,
            r.q75_b - r.q25_b,
            r.p_value,
            r.threshold,
            verdict
        );
    }
    if let Some(out) = &args.output {
        write_atomic(out, &csv_bytes(&rows)?)?;
    }
    Ok(())
}
