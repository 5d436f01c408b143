//! Population-based search with a shared evaluation budget.
//!
//! Every algorithm draws evaluations through a [`Tracker`], which charges
//! the budget, memoizes values by design key and records the best-so-far
//! trace. Candidate vectors are generated serially from the run's RNG and
//! evaluated in parallel, so results do not depend on thread scheduling.

pub mod bench;
pub mod de;
pub mod ga;
pub mod hybrid;
pub mod local;
pub mod shade;

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use de::{de_step, DeConfig};
pub use ga::{blx_crossover, ga_run, GaConfig};
pub use hybrid::{de_run, hybrid_run, shade_run, HybridConfig};
pub use local::{finite_difference_gradient, local_search, LocalSearchConfig};
pub use shade::{shade_step, ShadeMemory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A bound-constrained minimization problem.
pub trait Objective: Sync {
    fn bounds(&self) -> &[(f64, f64)];

    /// Identity of the design behind `x`. Vectors with equal keys have equal
    /// values and are evaluated once.
    fn key(&self, _x: &[f64]) -> Option<String> {
        None
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String>;

    fn dim(&self) -> usize {
        self.bounds().len()
    }
}

/// What consumes the evaluation budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Only first evaluations of a design key.
    #[default]
    DistinctKeys,
    /// Every objective call.
    AllCalls,
}

pub fn clamp_to_bounds(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

pub fn random_point(bounds: &[(f64, f64)], rng: &mut impl Rng) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
        .collect()
}

/// Budget accounting, memoization and best-so-far bookkeeping for one run.
pub struct Tracker<'a> {
    objective: &'a dyn Objective,
    budget: usize,
    mode: BudgetMode,
    used: usize,
    calls: usize,
    memo: HashMap<String, f64>,
    best_f: f64,
    best_x: Vec<f64>,
    trace: Vec<(usize, f64)>,
}

impl<'a> Tracker<'a> {
    pub fn new(objective: &'a dyn Objective, budget: usize, mode: BudgetMode) -> Self {
        Self {
            objective,
            budget,
            mode,
            used: 0,
            calls: 0,
            memo: HashMap::new(),
            best_f: f64::INFINITY,
            best_x: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        self.objective.bounds()
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.used)
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Distinct keys evaluated so far.
    pub fn distinct(&self) -> usize {
        self.memo.len()
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    pub fn trace(&self) -> &[(usize, f64)] {
        &self.trace
    }

    /// Evaluates a batch in order. Entries the budget could not pay for are
    /// `None`; once one entry is unpaid every later one is too.
    pub fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<Option<f64>>, OptimizeError> {
        let keys: Vec<Option<String>> = xs.par_iter().map(|x| self.objective.key(x)).collect();
        // Decide serially what gets charged.
        let mut charged = vec![false; xs.len()];
        let mut first_of: HashMap<&str, usize> = HashMap::new();
        let mut cut = xs.len();
        for (i, k) in keys.iter().enumerate() {
            let cost = match k {
                Some(k) => {
                    let seen = self.memo.contains_key(k.as_str()) || first_of.contains_key(k.as_str());
                    match self.mode {
                        BudgetMode::DistinctKeys => usize::from(!seen),
                        BudgetMode::AllCalls => 1,
                    }
                }
                None => 1,
            };
            if cost > 0 && self.used + charged.iter().filter(|&&c| c).count() >= self.budget {
                cut = i;
                break;
            }
            charged[i] = cost > 0;
            if let Some(k) = k {
                first_of.entry(k.as_str()).or_insert(i);
            }
        }
        // Evaluate each new key once, plus every keyless vector.
        let todo: Vec<usize> = (0..cut)
            .filter(|&i| match &keys[i] {
                Some(k) => !self.memo.contains_key(k.as_str()) && first_of[k.as_str()] == i,
                None => true,
            })
            .collect();
        let values: Vec<Result<f64, String>> = todo.par_iter().map(|&i| self.objective.evaluate(&xs[i])).collect();
        let mut fresh: HashMap<usize, f64> = HashMap::new();
        for (&i, v) in todo.iter().zip(values) {
            let v = v.map_err(OptimizeError::Evaluation)?;
            fresh.insert(i, v);
            if let Some(k) = &keys[i] {
                self.memo.insert(k.clone(), v);
            }
        }
        let mut out = Vec::with_capacity(xs.len());
        for i in 0..xs.len() {
            if i >= cut {
                out.push(None);
                continue;
            }
            let v = match &keys[i] {
                Some(k) => self.memo[k.as_str()],
                None => fresh[&i],
            };
            self.calls += 1;
            if charged[i] {
                self.used += 1;
            }
            if v < self.best_f {
                self.best_f = v;
                self.best_x = xs[i].clone();
            }
            if charged[i] {
                self.trace.push((self.used, self.best_f));
            }
            out.push(Some(v));
        }
        Ok(out)
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<Option<f64>, OptimizeError> {
        Ok(self.eval_batch(&[x.to_vec()])?[0])
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Population {
    pub xs: Vec<Vec<f64>>,
    pub fs: Vec<f64>,
}

impl Population {
    /// Uniform random population. Returns `None` if the budget ran out
    /// before it was fully evaluated.
    pub fn random(size: usize, tracker: &mut Tracker, rng: &mut impl Rng) -> Result<Option<Self>, OptimizeError> {
        let xs: Vec<Vec<f64>> = (0..size).map(|_| random_point(tracker.bounds(), rng)).collect();
        let fs = tracker.eval_batch(&xs)?;
        if fs.iter().any(Option::is_none) {
            return Ok(None);
        }
        Ok(Some(Self { xs, fs: fs.into_iter().map(Option::unwrap).collect() }))
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Index of the best individual; ties go to the lowest index.
    pub fn best_index(&self) -> usize {
        let mut b = 0;
        for i in 1..self.fs.len() {
            if self.fs[i] < self.fs[b] {
                b = i;
            }
        }
        b
    }

    pub fn best(&self) -> (&[f64], f64) {
        let b = self.best_index();
        (&self.xs[b], self.fs[b])
    }

    /// Indices sorted by fitness, stable.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fs[a].total_cmp(&self.fs[b]));
        idx
    }
}

/// Outcome of one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    /// `(evaluation index, best so far)` after every charged evaluation.
    pub trace: Vec<(usize, f64)>,
    pub evaluations: usize,
    pub calls: usize,
    pub restarts: usize,
    /// Every distinct key the run evaluated with its value, best first.
    #[serde(skip)]
    pub evaluated: Vec<(String, f64)>,
}

impl RunRecord {
    pub(crate) fn finish(algorithm: &str, seed: u64, config: serde_json::Value, tracker: &Tracker, restarts: usize) -> Self {
        let (x, f) = tracker.best();
        let mut evaluated: Vec<(String, f64)> = tracker.memo.iter().map(|(k, v)| (k.clone(), *v)).collect();
        evaluated.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Self {
            algorithm: algorithm.into(),
            seed,
            config,
            best_x: x.to_vec(),
            best_f: f,
            trace: tracker.trace().to_vec(),
            evaluations: tracker.used(),
            calls: tracker.calls(),
            restarts,
            evaluated,
        }
    }

    /// Best-so-far value after `evals` charged evaluations.
    pub fn best_at(&self, evals: usize) -> Option<f64> {
        let i = self.trace.partition_point(|&(e, _)| e <= evals);
        (i > 0).then(|| self.trace[i - 1].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Snapped {
        bounds: Vec<(f64, f64)>,
        calls: std::sync::atomic::AtomicUsize,
    }

    impl Objective for Snapped {
        fn bounds(&self) -> &[(f64, f64)] {
            &self.bounds
        }
        fn key(&self, x: &[f64]) -> Option<String> {
            Some(format!("{}", x[0].floor()))
        }
        fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
            self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(x[0].floor().abs())
        }
    }

    fn snapped() -> Snapped {
        Snapped { bounds: vec![(-10.0, 10.0)], calls: Default::default() }
    }

    #[test]
    fn repeated_keys_are_free() {
        let o = snapped();
        let mut t = Tracker::new(&o, 100, BudgetMode::DistinctKeys);
        let v = t.eval_batch(&[vec![1.2], vec![1.7], vec![2.5], vec![1.1]]).unwrap();
        assert_eq!(v, vec![Some(1.0), Some(1.0), Some(2.0), Some(1.0)]);
        assert_eq!(t.used(), 2);
        assert_eq!(t.calls(), 4);
        assert_eq!(o.calls.load(std::sync::atomic::Ordering::SeqCst), 2);
        let mut all = Tracker::new(&o, 100, BudgetMode::AllCalls);
        all.eval_batch(&[vec![1.2], vec![1.7]]).unwrap();
        assert_eq!(all.used(), 2);
    }

    #[test]
    fn budget_cuts_a_batch() {
        let o = snapped();
        let mut t = Tracker::new(&o, 2, BudgetMode::DistinctKeys);
        let v = t.eval_batch(&[vec![1.2], vec![3.0], vec![1.5], vec![5.0], vec![1.9]]).unwrap();
        assert_eq!(v, vec![Some(1.0), Some(3.0), Some(1.0), None, None]);
        assert!(t.exhausted());
        // Known keys stay available once the budget is spent.
        assert_eq!(t.eval(&[3.5]).unwrap(), Some(3.0));
        assert_eq!(t.eval(&[7.0]).unwrap(), None);
    }

    #[test]
    fn trace_is_nonincreasing() {
        let o = snapped();
        let mut t = Tracker::new(&o, 100, BudgetMode::DistinctKeys);
        t.eval_batch(&[vec![5.0], vec![-3.0], vec![8.0], vec![0.5], vec![9.0]]).unwrap();
        let tr = t.trace();
        assert_eq!(tr.len(), 5);
        assert!(tr.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 == w[0].0 + 1));
        assert_eq!(t.best().1, 0.0);
    }
}
