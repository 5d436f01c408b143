//! SHADE alternating with local search, with restarts on stagnation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    de_step, local_search, shade_step, BudgetMode, DeConfig, LocalSearchConfig, Objective,
    OptimizeError, Population, RunRecord, ShadeMemory, Tracker,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub pop_size: usize,
    /// SHADE memory slots.
    pub memory_size: usize,
    /// SHADE generations between local searches.
    pub shade_generations: usize,
    pub local: LocalSearchConfig,
    /// Relative gain an alternation must reach to count as progress.
    pub restart_threshold: f64,
    /// Alternations without progress before a restart.
    pub restart_after: usize,
    pub budget: usize,
    pub budget_mode: BudgetMode,
    pub seed: u64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            pop_size: 60,
            memory_size: 50,
            shade_generations: 1,
            local: LocalSearchConfig::default(),
            restart_threshold: 1e-4,
            restart_after: 3,
            budget: 2000,
            budget_mode: BudgetMode::DistinctKeys,
            seed: 0,
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let fail = |m: &str| Err(OptimizeError::Config(m.into()));
        if self.pop_size < 4 {
            return fail("population must hold at least 4 individuals");
        }
        if self.memory_size == 0 || self.shade_generations == 0 || self.restart_after == 0 {
            return fail("memory size, phase length and restart count must be positive");
        }
        if !(self.restart_threshold > 0.0) || !(self.local.eps > 0.0) {
            return fail("thresholds must be positive");
        }
        if self.budget < self.pop_size {
            return fail("budget must cover the initial population");
        }
        Ok(())
    }
}

fn relative_gain(before: f64, after: f64) -> f64 {
    if before == after {
        0.0
    } else {
        (before - after) / before.abs().max(f64::MIN_POSITIVE)
    }
}

/// SHADE + local search with restarts.
pub fn hybrid_run(cfg: &HybridConfig, problem: &dyn Objective) -> Result<RunRecord, OptimizeError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = Tracker::new(problem, cfg.budget, cfg.budget_mode);
    let mut restarts = 0;
    'run: loop {
        let Some(mut pop) = Population::random(cfg.pop_size, &mut tracker, &mut rng)? else {
            break;
        };
        let mut memory = ShadeMemory::new(cfg.memory_size);
        let mut stalled = 0;
        while !tracker.exhausted() {
            let before = pop.best().1;
            for _ in 0..cfg.shade_generations {
                if !shade_step(&mut pop, &mut memory, &mut tracker, &mut rng)? {
                    break 'run;
                }
            }
            let b = pop.best_index();
            let (x, f) = local_search(&pop.xs[b].clone(), pop.fs[b], &cfg.local, &mut tracker)?;
            if f < pop.fs[b] {
                pop.xs[b] = x;
                pop.fs[b] = f;
            }
            if relative_gain(before, pop.best().1) > cfg.restart_threshold {
                stalled = 0;
            } else {
                stalled += 1;
            }
            if stalled >= cfg.restart_after {
                if tracker.exhausted() {
                    break 'run;
                }
                restarts += 1;
                continue 'run;
            }
        }
        break;
    }
    let config = serde_json::to_value(cfg).unwrap_or_default();
    Ok(RunRecord::finish("hybrid", cfg.seed, config, &tracker, restarts))
}

/// Plain SHADE until the budget is spent.
pub fn shade_run(cfg: &HybridConfig, problem: &dyn Objective) -> Result<RunRecord, OptimizeError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = Tracker::new(problem, cfg.budget, cfg.budget_mode);
    if let Some(mut pop) = Population::random(cfg.pop_size, &mut tracker, &mut rng)? {
        let mut memory = ShadeMemory::new(cfg.memory_size);
        while shade_step(&mut pop, &mut memory, &mut tracker, &mut rng)? && !tracker.exhausted() {}
    }
    let config = serde_json::to_value(cfg).unwrap_or_default();
    Ok(RunRecord::finish("shade", cfg.seed, config, &tracker, 0))
}

/// Plain rand/1/bin differential evolution until the budget is spent.
pub fn de_run(
    cfg: &DeConfig,
    budget: usize,
    budget_mode: BudgetMode,
    seed: u64,
    problem: &dyn Objective,
) -> Result<RunRecord, OptimizeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new(problem, budget, budget_mode);
    if let Some(mut pop) = Population::random(cfg.pop_size, &mut tracker, &mut rng)? {
        while de_step(&mut pop, cfg, &mut tracker, &mut rng)? && !tracker.exhausted() {}
    }
    let config = serde_json::to_value(cfg).unwrap_or_default();
    Ok(RunRecord::finish("de", seed, config, &tracker, 0))
}
