//! Statistics over finished campaigns: solution tables, best-solution
//! selection, value frequencies, convergence bands and rank tests.

pub mod export;
pub mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::BuildingModel;
use crate::campaign::FenestrationProblem;
use crate::encoding::{CanonicalDesign, Encoder, Evaluation, SHADING_FIELDS};
use crate::fitness::PenaltyKind;
use crate::optimize::RunRecord;

pub use stats::{
    bonferroni, exact_rank_sum_p, quantile, variability, wilcoxon_rank_sum, wilcoxon_signed_rank, Method, RankTest,
    TestOutcome, Variability,
};

/// Width of the histogram bins for continuous fields.
pub const FREQUENCY_BIN: f64 = 0.1;
/// Solutions kept per run.
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no solutions to choose from")]
    EmptyTable,
    #[error("need at least {needed} values, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("all values are identical")]
    DegenerateSamples,
    #[error("non-finite value in sample")]
    NonFinite,
    #[error("paired samples differ in length ({left} vs {right})")]
    Unpaired { left: usize, right: usize },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("runs spent different budgets: {0:?}")]
    MismatchedBudgets(Vec<usize>),
    #[error("no cached evaluation for design {0}")]
    MissingEvaluation(String),
    #[error("{0}")]
    Design(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Flat, building-level part of a solution row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    /// Unique within a campaign: run and rank.
    pub label: String,
    pub design_id: String,
    pub run: usize,
    pub seed: u64,
    pub rank: usize,
    pub fitness: f64,
    pub edh: f64,
    pub edc: f64,
    pub ed_total: f64,
    pub nct: f64,
    pub wwr_pct: f64,
    pub k: f64,
    pub q_sol_jul: f64,
    pub p_solar: f64,
    pub p_window_u: f64,
    pub p_k: f64,
    pub p_min_glazing: f64,
    pub penalty_free: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub summary: SolutionSummary,
    pub design: CanonicalDesign,
    /// Canonical genome of the design.
    pub genome: Vec<f64>,
}

/// A field value as counted by [`frequency`].
#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Text(String),
    Number(f64),
    /// Device not built.
    Absent,
}

impl FieldValue {
    fn bin_label(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Number(v) => format!("{:.1}", (v / FREQUENCY_BIN).round() * FREQUENCY_BIN + 0.0),
            Self::Absent => "absent".into(),
        }
    }
}

/// Window to wall ratio in percent over every façade of the building.
pub fn wwr_pct(design: &CanonicalDesign, building: &BuildingModel) -> f64 {
    let wall: f64 = building.facades.iter().map(|f| f.gross_area_m2()).sum();
    100.0 * design.window_area_m2() / wall
}

impl SolutionRow {
    pub fn from_evaluation(
        eval: &Evaluation,
        building: &BuildingModel,
        encoder: &Encoder,
        run: usize,
        seed: u64,
        rank: usize,
    ) -> Result<Self, AnalysisError> {
        let d = &eval.design;
        let f = &eval.fitness;
        let k = d.k(building).map_err(|e| AnalysisError::Design(e.to_string()))?;
        let summary = SolutionSummary {
            label: format!("r{run:02}-{rank:02}"),
            design_id: d.id(),
            run,
            seed,
            rank,
            fitness: f.total,
            edh: eval.sim.edh,
            edc: eval.sim.edc,
            ed_total: eval.sim.edh + eval.sim.edc,
            nct: eval.sim.nct,
            wwr_pct: wwr_pct(d, building),
            k,
            q_sol_jul: eval.sim.q_sol_jul,
            p_solar: f.penalty(PenaltyKind::SolarControl),
            p_window_u: f.penalty(PenaltyKind::WindowU),
            p_k: f.penalty(PenaltyKind::GlobalK),
            p_min_glazing: f.penalty(PenaltyKind::MinGlazing),
            penalty_free: f.penalty_free(),
        };
        Ok(Self { summary, design: d.clone(), genome: encoder.genome_from_design(d) })
    }

    /// Every design-level field with its value, in report order.
    pub fn fields(&self) -> Vec<(String, FieldValue)> {
        let d = &self.design;
        let mut out = vec![
            ("frame".to_string(), FieldValue::Text(d.frame.id.clone())),
            ("frame.u".to_string(), FieldValue::Number(d.frame.u_value)),
            ("reflectance".to_string(), FieldValue::Number(d.reflectance)),
        ];
        for f in &d.facades {
            out.push((format!("{}.glazing", f.name), FieldValue::Text(f.glazing.code.clone())));
            out.push((format!("{}.glazing.u_g", f.name), FieldValue::Number(f.glazing.u_g)));
            out.push((format!("{}.control", f.name), FieldValue::Text(format!("SC{}", f.control))));
            for (label, v) in SHADING_FIELDS.iter().zip(f.shading.as_array()) {
                let value = if v > 0.0 { FieldValue::Number(v) } else { FieldValue::Absent };
                out.push((format!("{}.{label}", f.name), value));
            }
        }
        for w in &d.windows {
            out.push((format!("{}.width", w.slot_id), FieldValue::Number(w.size.width_m())));
            out.push((format!("{}.height", w.slot_id), FieldValue::Number(w.size.height_m())));
            out.push((format!("{}.area", w.slot_id), FieldValue::Number(w.size.area_m2())));
            out.push((format!("{}.u_w", w.slot_id), FieldValue::Number(w.assembly.u_w)));
        }
        out
    }

    pub fn field(&self, name: &str) -> Option<FieldValue> {
        let s = &self.summary;
        let scalar = match name {
            "edh" => Some(s.edh),
            "edc" => Some(s.edc),
            "nct" => Some(s.nct),
            "wwr" => Some(s.wwr_pct),
            "k" => Some(s.k),
            "q_sol_jul" => Some(s.q_sol_jul),
            "fitness" => Some(s.fitness),
            _ => None,
        };
        if let Some(v) = scalar {
            return Some(FieldValue::Number(v));
        }
        self.fields().into_iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

/// Top `top_k` distinct designs of every run, best first within a run.
pub fn solution_table(
    problem: &FenestrationProblem,
    runs: &[RunRecord],
    top_k: usize,
) -> Result<Vec<SolutionRow>, AnalysisError> {
    let mut rows = Vec::new();
    for (run, record) in runs.iter().enumerate() {
        for (rank, (key, _)) in record.evaluated.iter().take(top_k).enumerate() {
            let eval = problem.cache().get(key).ok_or_else(|| AnalysisError::MissingEvaluation(key.clone()))?;
            rows.push(SolutionRow::from_evaluation(
                &eval,
                problem.building(),
                problem.encoder(),
                run,
                record.seed,
                rank + 1,
            )?);
        }
    }
    Ok(rows)
}

/// Canonical genome of the best design of every run.
pub fn best_genomes(problem: &FenestrationProblem, runs: &[RunRecord]) -> Result<Vec<Vec<f64>>, AnalysisError> {
    runs.iter()
        .map(|r| {
            let (key, _) = r.evaluated.first().ok_or(AnalysisError::EmptyTable)?;
            let eval = problem.cache().get(key).ok_or_else(|| AnalysisError::MissingEvaluation(key.clone()))?;
            Ok(problem.encoder().genome_from_design(&eval.design))
        })
        .collect()
}

/// What [`select_best`] needs from a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Demands {
    pub id: String,
    pub edh: f64,
    pub edc: f64,
    pub nct: f64,
}

impl From<&SolutionSummary> for Demands {
    fn from(s: &SolutionSummary) -> Self {
        Self { id: s.label.clone(), edh: s.edh, edc: s.edc, nct: s.nct }
    }
}

/// Index of the preferred solution. Among rows meeting both demand limits
/// the lowest combined demand wins; if none does, the smallest excess over
/// the limits wins. Ties go to lower NCT, then to the smaller id.
pub fn select_best(rows: &[Demands], edh_limit: f64, edc_limit: f64) -> Result<usize, AnalysisError> {
    if rows.is_empty() {
        return Err(AnalysisError::EmptyTable);
    }
    let compliant = |r: &Demands| r.edh <= edh_limit && r.edc <= edc_limit;
    let any_compliant = rows.iter().any(compliant);
    let score = |r: &Demands| {
        if any_compliant {
            r.edh + r.edc
        } else {
            (r.edh - edh_limit).max(0.0) + (r.edc - edc_limit).max(0.0)
        }
    };
    (0..rows.len())
        .filter(|&i| !any_compliant || compliant(&rows[i]))
        .min_by(|&a, &b| {
            let (x, y) = (&rows[a], &rows[b]);
            score(x).total_cmp(&score(y)).then(x.nct.total_cmp(&y.nct)).then_with(|| x.id.cmp(&y.id))
        })
        .ok_or(AnalysisError::EmptyTable)
}

/// Counts of each value; continuous values are binned to [`FREQUENCY_BIN`].
pub fn frequency_of(values: impl IntoIterator<Item = FieldValue>) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    for v in values {
        *hist.entry(v.bin_label()).or_insert(0) += 1;
    }
    hist
}

pub fn frequency(rows: &[SolutionRow], field: &str) -> Result<BTreeMap<String, usize>, AnalysisError> {
    let values: Option<Vec<FieldValue>> = rows.iter().map(|r| r.field(field)).collect();
    let values = values.ok_or_else(|| AnalysisError::UnknownField(field.to_string()))?;
    if rows.is_empty() {
        return Err(AnalysisError::EmptyTable);
    }
    Ok(frequency_of(values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub evaluation: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Distribution of the best-so-far value across runs at every evaluation.
pub fn convergence(runs: &[RunRecord]) -> Result<Vec<ConvergenceRow>, AnalysisError> {
    if runs.is_empty() {
        return Err(AnalysisError::EmptyTable);
    }
    let spent: Vec<usize> = runs.iter().map(|r| r.evaluations).collect();
    if spent.iter().any(|&e| e != spent[0]) {
        return Err(AnalysisError::MismatchedBudgets(spent));
    }
    let mut rows = Vec::with_capacity(spent[0]);
    for e in 1..=spent[0] {
        let mut v: Vec<f64> = runs.iter().filter_map(|r| r.best_at(e)).collect();
        if v.len() != runs.len() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        rows.push(ConvergenceRow {
            evaluation: e,
            median: quantile(&v, 0.5),
            q25: quantile(&v, 0.25),
            q75: quantile(&v, 0.75),
            q05: quantile(&v, 0.05),
            q95: quantile(&v, 0.95),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessEntry {
    pub dimension: String,
    pub value: f64,
    /// Runs whose best design has this value.
    pub count: usize,
}

/// Value counts per genome dimension over the best design of each run.
pub fn robustness(names: &[String], best: &[Vec<f64>]) -> Result<Vec<RobustnessEntry>, AnalysisError> {
    if best.len() < 2 {
        return Err(AnalysisError::TooFewRows { needed: 2, got: best.len() });
    }
    let mut out = Vec::new();
    for (j, name) in names.iter().enumerate() {
        // Canonical values are cell centres; rounding only removes float noise.
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for g in best {
            *counts.entry((g[j] * 1e9).round() as i64).or_insert(0) += 1;
        }
        out.extend(counts.into_iter().map(|(v, count)| RobustnessEntry {
            dimension: name.clone(),
            value: v as f64 / 1e9,
            count,
        }));
    }
    Ok(out)
}

/// Dimensions whose most common value is shared by at least `min_count` runs.
pub fn consensus_dimensions(entries: &[RobustnessEntry], min_count: usize) -> usize {
    let mut modal: BTreeMap<&str, usize> = BTreeMap::new();
    for e in entries {
        let m = modal.entry(e.dimension.as_str()).or_insert(0);
        *m = (*m).max(e.count);
    }
    modal.values().filter(|&&c| c >= min_count).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::RunRecord;

    fn demand(id: &str, edh: f64, edc: f64, nct: f64) -> Demands {
        Demands { id: id.into(), edh, edc, nct }
    }

    #[test]
    fn lowest_combined_demand_among_compliant() {
        let rows = [demand("a", 30.0, 14.0, 100.0), demand("b", 28.0, 15.0, 100.0)];
        assert_eq!(select_best(&rows, 30.0, 15.0).unwrap(), 1);
    }

    #[test]
    fn smallest_excess_when_nothing_complies() {
        let rows = [demand("a", 20.0, 18.0, 1.0), demand("b", 21.0, 16.0, 1.0), demand("c", 10.0, 17.0, 1.0)];
        assert_eq!(select_best(&rows, 30.0, 15.0).unwrap(), 1);
        assert_eq!(select_best(&rows[..1], 30.0, 15.0).unwrap(), 0);
        assert_eq!(select_best(&[], 30.0, 15.0), Err(AnalysisError::EmptyTable));
    }

    #[test]
    fn ties_go_to_lower_nct_then_id() {
        let rows = [demand("b", 20.0, 10.0, 50.0), demand("a", 20.0, 10.0, 50.0), demand("c", 25.0, 5.0, 40.0)];
        assert_eq!(select_best(&rows, 30.0, 15.0).unwrap(), 2);
        assert_eq!(select_best(&rows[..2], 30.0, 15.0).unwrap(), 1);
    }

    #[test]
    fn absent_devices_are_counted_apart() {
        let h = frequency_of([FieldValue::Absent, FieldValue::Absent, FieldValue::Number(0.3)]);
        assert_eq!(h, BTreeMap::from([("absent".to_string(), 2), ("0.3".to_string(), 1)]));
        let sc = frequency_of(std::iter::repeat_n(FieldValue::Text("SC0".into()), 150));
        assert_eq!(sc, BTreeMap::from([("SC0".to_string(), 150)]));
    }

    fn record(trace: Vec<(usize, f64)>) -> RunRecord {
        RunRecord {
            algorithm: "x".into(),
            seed: 0,
            config: serde_json::Value::Null,
            best_x: vec![],
            best_f: trace.last().unwrap().1,
            evaluations: trace.len(),
            calls: trace.len(),
            trace,
            restarts: 0,
            evaluated: vec![],
        }
    }

    #[test]
    fn single_run_convergence_is_its_trace() {
        let r = record(vec![(1, 5.0), (2, 3.0), (3, 3.0), (4, 1.0)]);
        let rows = convergence(std::slice::from_ref(&r)).unwrap();
        assert_eq!(rows.iter().map(|c| c.median).collect::<Vec<_>>(), vec![5.0, 3.0, 3.0, 1.0]);
        assert!(rows.iter().all(|c| c.q05 == c.q95));
        let short = record(vec![(1, 5.0)]);
        assert!(matches!(convergence(&[r, short]), Err(AnalysisError::MismatchedBudgets(_))));
    }

    #[test]
    fn robustness_clusters() {
        let names = vec!["a".to_string(), "b".to_string()];
        let mut best = vec![vec![0.1, 2.0]; 10];
        best.extend(vec![vec![0.3, 2.0]; 5]);
        let e = robustness(&names, &best).unwrap();
        let a: Vec<usize> = e.iter().filter(|x| x.dimension == "a").map(|x| x.count).collect();
        assert_eq!(a, vec![10, 5]);
        assert_eq!(e.iter().filter(|x| x.dimension == "b").map(|x| x.count).collect::<Vec<_>>(), vec![15]);
        assert_eq!(consensus_dimensions(&e, 8), 2);
        assert_eq!(consensus_dimensions(&e, 11), 1);
    }

    proptest::proptest! {
        #[test]
        fn select_best_ignores_row_order(
            vals in proptest::collection::vec((0.0f64..60.0, 0.0f64..30.0, 0.0f64..400.0), 1..20),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let rows: Vec<Demands> = vals
                .iter()
                .enumerate()
                .map(|(i, &(h, c, n))| demand(&format!("r{i:02}"), h.round(), c.round(), n.round()))
                .collect();
            let pick = rows[select_best(&rows, 30.0, 15.0).unwrap()].id.clone();
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            proptest::prop_assert_eq!(&shuffled[select_best(&shuffled, 30.0, 15.0).unwrap()].id, &pick);
        }

        #[test]
        fn histogram_counts_sum_to_rows(vals in proptest::collection::vec(proptest::option::of(-5.0f64..5.0), 0..200)) {
            let h = frequency_of(vals.iter().map(|v| v.map_or(FieldValue::Absent, FieldValue::Number)));
            proptest::prop_assert_eq!(h.values().sum::<usize>(), vals.len());
        }

        #[test]
        fn convergence_bands_are_ordered(
            steps in proptest::collection::vec(proptest::collection::vec(0.0f64..10.0, 30), 1..12),
        ) {
            let runs: Vec<RunRecord> = steps
                .iter()
                .map(|s| {
                    let mut best = f64::INFINITY;
                    record(s.iter().enumerate().map(|(i, &v)| { best = best.min(v); (i + 1, best) }).collect())
                })
                .collect();
            for c in convergence(&runs).unwrap() {
                proptest::prop_assert!(c.q05 <= c.q25 && c.q25 <= c.median && c.median <= c.q75 && c.q75 <= c.q95);
            }
        }
    }
}
