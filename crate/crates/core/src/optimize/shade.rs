//! Success-history based adaptive differential evolution.
//!
//! Each trial draws its scale factor from a Cauchy and its crossover rate
//! from a normal distribution centred on a randomly chosen memory slot.
//! Parameters that produced improvements are averaged into the next slot,
//! weighted by the improvement they brought.

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::de::binomial;
use super::{OptimizeError, Population, Tracker};

pub const MEMORY_INIT: f64 = 0.5;
pub const SAMPLING_SCALE: f64 = 0.1;
pub const P_MAX: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadeMemory {
    pub m_f: Vec<f64>,
    pub m_cr: Vec<f64>,
    /// Slot the next successful generation writes to.
    pub next: usize,
    /// Parents replaced by better trials, at most one population's worth.
    pub archive: Vec<Vec<f64>>,
}

impl ShadeMemory {
    pub fn new(h: usize) -> Self {
        Self { m_f: vec![MEMORY_INIT; h], m_cr: vec![MEMORY_INIT; h], next: 0, archive: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.m_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_f.is_empty()
    }

    /// Writes the weighted means of successful parameters into the next
    /// slot. `deltas` are the fitness improvements, used as weights.
    pub fn record(&mut self, s_f: &[f64], s_cr: &[f64], deltas: &[f64]) {
        let total: f64 = deltas.iter().sum();
        if s_f.is_empty() || !(total > 0.0) {
            return;
        }
        let w: Vec<f64> = deltas.iter().map(|d| d / total).collect();
        let num: f64 = w.iter().zip(s_f).map(|(w, f)| w * f * f).sum();
        let den: f64 = w.iter().zip(s_f).map(|(w, f)| w * f).sum();
        self.m_f[self.next] = (num / den).clamp(f64::MIN_POSITIVE, 1.0);
        self.m_cr[self.next] = w.iter().zip(s_cr).map(|(w, c)| w * c).sum::<f64>().clamp(0.0, 1.0);
        self.next = (self.next + 1) % self.len();
    }
}

fn sample_f(m: f64, rng: &mut impl Rng) -> f64 {
    let cauchy = Cauchy::new(m, SAMPLING_SCALE).expect("positive scale");
    loop {
        let f = cauchy.sample(rng);
        if f > 0.0 {
            return f.min(1.0);
        }
    }
}

fn sample_cr(m: f64, rng: &mut impl Rng) -> f64 {
    Normal::new(m, SAMPLING_SCALE).expect("positive scale").sample(rng).clamp(0.0, 1.0)
}

/// One SHADE generation with current-to-pbest/1 mutation. Returns `false`
/// when the budget ran out mid-generation.
pub fn shade_step(
    pop: &mut Population,
    memory: &mut ShadeMemory,
    tracker: &mut Tracker,
    rng: &mut impl Rng,
) -> Result<bool, OptimizeError> {
    let n = pop.len();
    if n < 4 {
        return Err(OptimizeError::Config(format!("population of {n} is too small for SHADE")));
    }
    let bounds = tracker.bounds().to_vec();
    let d = bounds.len();
    let ranking = pop.ranking();
    let p_min = 2.0 / n as f64;

    let mut params = Vec::with_capacity(n);
    let mut trials = Vec::with_capacity(n);
    for i in 0..n {
        let r = rng.random_range(0..memory.len());
        let f = sample_f(memory.m_f[r], rng);
        let cr = sample_cr(memory.m_cr[r], rng);
        let p = rng.random_range(p_min..=P_MAX.max(p_min));
        let top = ((p * n as f64).round() as usize).clamp(2, n);
        let pbest = ranking[rng.random_range(0..top)];
        let r1 = loop {
            let r = rng.random_range(0..n);
            if r != i {
                break r;
            }
        };
        let pool = n + memory.archive.len();
        let x_r2 = loop {
            let r = rng.random_range(0..pool);
            if r != i && r != r1 {
                break if r < n { &pop.xs[r] } else { &memory.archive[r - n] };
            }
        };
        let xi = &pop.xs[i];
        let mutant: Vec<f64> = (0..d)
            .map(|j| {
                let v = xi[j] + f * (pop.xs[pbest][j] - xi[j]) + f * (pop.xs[r1][j] - x_r2[j]);
                let (lo, hi) = bounds[j];
                // Midpoint repair towards the parent keeps diversity near bounds.
                if v < lo {
                    (lo + xi[j]) / 2.0
                } else if v > hi {
                    (hi + xi[j]) / 2.0
                } else {
                    v
                }
            })
            .collect();
        trials.push(binomial(xi, &mutant, cr, rng));
        params.push((f, cr));
    }

    let fs = tracker.eval_batch(&trials)?;
    let (mut s_f, mut s_cr, mut deltas) = (Vec::new(), Vec::new(), Vec::new());
    let mut complete = true;
    for (i, (u, fu)) in trials.into_iter().zip(fs).enumerate() {
        let Some(fu) = fu else {
            complete = false;
            continue;
        };
        if fu <= pop.fs[i] {
            if fu < pop.fs[i] {
                memory.archive.push(std::mem::take(&mut pop.xs[i]));
                s_f.push(params[i].0);
                s_cr.push(params[i].1);
                deltas.push(pop.fs[i] - fu);
            }
            pop.xs[i] = u;
            pop.fs[i] = fu;
        }
    }
    while memory.archive.len() > n {
        let k = rng.random_range(0..memory.archive.len());
        memory.archive.swap_remove(k);
    }
    memory.record(&s_f, &s_cr, &deltas);
    Ok(complete)
}
