//! Real-coded generational genetic algorithm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{clamp_to_bounds, BudgetMode, Objective, OptimizeError, Population, RunRecord, Tracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub pop_size: usize,
    pub crossover_prob: f64,
    pub blx_alpha: f64,
    /// Per-gene probability.
    pub mutation_prob: f64,
    /// Mutation standard deviation as a fraction of the range.
    pub sigma_frac: f64,
    pub tournament: usize,
    pub elitism: usize,
    pub budget: usize,
    pub budget_mode: BudgetMode,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            pop_size: 60,
            crossover_prob: 0.9,
            blx_alpha: 0.5,
            mutation_prob: 0.01,
            sigma_frac: 0.1,
            tournament: 2,
            elitism: 1,
            budget: 2000,
            budget_mode: BudgetMode::DistinctKeys,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.crossover_prob) || !prob(self.mutation_prob) {
            return Err(OptimizeError::Config("probabilities must lie in [0, 1]".into()));
        }
        if self.pop_size < 2 || self.tournament == 0 || self.elitism >= self.pop_size {
            return Err(OptimizeError::Config("population, tournament or elitism out of range".into()));
        }
        if !(self.blx_alpha >= 0.0) || !(self.sigma_frac >= 0.0) {
            return Err(OptimizeError::Config("alpha and sigma must be nonnegative".into()));
        }
        if self.budget < self.pop_size {
            return Err(OptimizeError::Config("budget must cover the initial population".into()));
        }
        Ok(())
    }
}

/// BLX-α: each gene uniform on the parents' interval widened by `α` times
/// its length on both sides. Children are not clamped.
pub fn blx_crossover(a: &[f64], b: &[f64], alpha: f64, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let mut gene = |x: f64, y: f64| {
        let (lo, hi) = (x.min(y), x.max(y));
        let ext = alpha * (hi - lo);
        if hi - lo > 0.0 {
            rng.random_range(lo - ext..=hi + ext)
        } else {
            lo
        }
    };
    let c1 = a.iter().zip(b).map(|(&x, &y)| gene(x, y)).collect();
    let c2 = a.iter().zip(b).map(|(&x, &y)| gene(x, y)).collect();
    (c1, c2)
}

fn tournament(pop: &Population, k: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..k {
        let c = rng.random_range(0..pop.len());
        if pop.fs[c] < pop.fs[best] {
            best = c;
        }
    }
    best
}

pub fn ga_run(cfg: &GaConfig, problem: &dyn Objective) -> Result<RunRecord, OptimizeError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = Tracker::new(problem, cfg.budget, cfg.budget_mode);
    let bounds = problem.bounds().to_vec();
    let n = cfg.pop_size;
    if let Some(mut pop) = Population::random(n, &mut tracker, &mut rng)? {
        while !tracker.exhausted() {
            let ranking = pop.ranking();
            let mut children: Vec<Vec<f64>> = Vec::with_capacity(n);
            while children.len() < n - cfg.elitism {
                let a = &pop.xs[tournament(&pop, cfg.tournament, &mut rng)];
                let b = &pop.xs[tournament(&pop, cfg.tournament, &mut rng)];
                let (c1, c2) = if rng.random::<f64>() < cfg.crossover_prob {
                    blx_crossover(a, b, cfg.blx_alpha, &mut rng)
                } else {
                    (a.clone(), b.clone())
                };
                children.push(c1);
                children.push(c2);
            }
            children.truncate(n - cfg.elitism);
            for c in &mut children {
                for (j, v) in c.iter_mut().enumerate() {
                    if rng.random::<f64>() < cfg.mutation_prob {
                        let (lo, hi) = bounds[j];
                        let sigma = cfg.sigma_frac * (hi - lo);
                        if sigma > 0.0 {
                            *v += Normal::new(0.0, sigma).expect("positive sigma").sample(&mut rng);
                        }
                    }
                }
                clamp_to_bounds(c, &bounds);
            }
            let fs = tracker.eval_batch(&children)?;
            let mut next = Population::default();
            for &e in &ranking[..cfg.elitism] {
                next.xs.push(pop.xs[e].clone());
                next.fs.push(pop.fs[e]);
            }
            let complete = fs.iter().all(Option::is_some);
            for (c, f) in children.into_iter().zip(fs) {
                if let Some(f) = f {
                    next.xs.push(c);
                    next.fs.push(f);
                }
            }
            if !complete {
                break;
            }
            pop = next;
        }
    }
    let config = serde_json::to_value(cfg).unwrap_or_default();
    Ok(RunRecord::finish("ga", cfg.seed, config, &tracker, 0))
}
