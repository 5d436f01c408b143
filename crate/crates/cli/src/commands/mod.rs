pub mod bench;
pub mod catalog;
pub mod compare;
pub mod inspect;
pub mod run;

use anyhow::Result;
use fenopt::analysis::export::write_rows;
use fenopt::analysis::{convergence, variability, Variability};
use fenopt::optimize::RunRecord;
use serde::Serialize;

use crate::output::{run_file, Artifacts, RunReport, RunSummary};

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(buf)
}

/// Per-run files and the convergence table shared by every campaign kind.
pub fn add_run_files(
    artifacts: &mut Artifacts,
    records: &[RunRecord],
    best: impl Fn(usize) -> Option<fenopt::analysis::SolutionRow>,
) -> Result<Vec<RunSummary>> {
    let mut summaries = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let report = RunReport { record: r.clone(), best_design: best(i) };
        let file = run_file(i);
        summaries.push(RunSummary {
            seed: r.seed,
            file: file.clone(),
            best_f: r.best_f,
            evaluations: r.evaluations,
            restarts: r.restarts,
            penalty_free: report.best_design.as_ref().map(|d| d.summary.penalty_free),
        });
        artifacts.add_json(file, &report)?;
    }
    artifacts.add("convergence.csv", csv_bytes(&convergence(records)?)?);
    Ok(summaries)
}

/// Spread of a per-run value; `None` below two runs.
pub fn spread(values: &[f64]) -> Option<Variability> {
    variability(values).ok()
}
