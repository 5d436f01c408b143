//! Classic differential evolution, rand/1/bin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{clamp_to_bounds, OptimizeError, Population, Tracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub pop_size: usize,
    pub f: f64,
    pub cr: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { pop_size: 60, f: 0.8, cr: 0.5 }
    }
}

/// `k` distinct indices in `0..n`, none equal to `exclude`.
pub(crate) fn distinct_indices<const K: usize>(n: usize, exclude: usize, rng: &mut impl Rng) -> [usize; K] {
    let mut out = [0; K];
    let mut filled = 0;
    while filled < K {
        let r = rng.random_range(0..n);
        if r != exclude && !out[..filled].contains(&r) {
            out[filled] = r;
            filled += 1;
        }
    }
    out
}

/// Binomial crossover of `mutant` into `target` with one forced gene.
pub(crate) fn binomial(target: &[f64], mutant: &[f64], cr: f64, rng: &mut impl Rng) -> Vec<f64> {
    let d = target.len();
    let j_rand = rng.random_range(0..d);
    (0..d)
        .map(|j| if j == j_rand || rng.random::<f64>() < cr { mutant[j] } else { target[j] })
        .collect()
}

/// One generation. Returns `false` when the budget ran out mid-generation;
/// the trials that were evaluated still take part in selection.
pub fn de_step(
    pop: &mut Population,
    cfg: &DeConfig,
    tracker: &mut Tracker,
    rng: &mut impl Rng,
) -> Result<bool, OptimizeError> {
    let n = pop.len();
    if n < 4 {
        return Err(OptimizeError::Config(format!("population of {n} is too small for rand/1")));
    }
    let bounds = tracker.bounds().to_vec();
    let trials: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let [r1, r2, r3] = distinct_indices::<3>(n, i, rng);
            let mutant: Vec<f64> = (0..bounds.len())
                .map(|j| pop.xs[r1][j] + cfg.f * (pop.xs[r2][j] - pop.xs[r3][j]))
                .collect();
            let mut u = binomial(&pop.xs[i], &mutant, cfg.cr, rng);
            clamp_to_bounds(&mut u, &bounds);
            u
        })
        .collect();
    let fs = tracker.eval_batch(&trials)?;
    let mut complete = true;
    for (i, (u, f)) in trials.into_iter().zip(fs).enumerate() {
        match f {
            Some(f) if f <= pop.fs[i] => {
                pop.xs[i] = u;
                pop.fs[i] = f;
            }
            Some(_) => {}
            None => complete = false,
        }
    }
    Ok(complete)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::bench::Sphere;
    use crate::optimize::BudgetMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_population_stays_put() {
        let sphere = Sphere::new(3, 0.0, 5.0, 0);
        let mut t = Tracker::new(&sphere, 1000, BudgetMode::AllCalls);
        let x = vec![1.0, -2.0, 0.5];
        let f = t.eval(&x).unwrap().unwrap();
        let mut pop = Population { xs: vec![x.clone(); 6], fs: vec![f; 6] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        de_step(&mut pop, &DeConfig::default(), &mut t, &mut rng).unwrap();
        assert!(pop.xs.iter().all(|y| *y == x));
    }

    #[test]
    fn zero_scale_copies_r1() {
        let sphere = Sphere::new(2, 0.0, 5.0, 0);
        let mut t = Tracker::new(&sphere, 1000, BudgetMode::AllCalls);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pop = Population::random(8, &mut t, &mut rng).unwrap().unwrap();
        let before = pop.xs.clone();
        let cfg = DeConfig { f: 0.0, cr: 1.0, ..Default::default() };
        de_step(&mut pop, &cfg, &mut t, &mut rng).unwrap();
        // With CR = 1 the trial is the mutant, which is some other member.
        for x in &pop.xs {
            assert!(before.contains(x));
        }
    }

    #[test]
    fn sphere_best_improves_most_generations() {
        let sphere = Sphere::new(5, 0.0, 5.0, 0);
        let mut t = Tracker::new(&sphere, 1_000_000, BudgetMode::AllCalls);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pop = Population::random(60, &mut t, &mut rng).unwrap().unwrap();
        let mut bests = vec![pop.best().1];
        for _ in 0..50 {
            de_step(&mut pop, &DeConfig::default(), &mut t, &mut rng).unwrap();
            bests.push(pop.best().1);
        }
        assert!(bests.windows(2).all(|w| w[1] <= w[0]));
        // Rand/1/bin moves the population best in roughly a third of
        // generations on this problem.
        let strict = bests.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(strict >= 5, "{strict}");
        assert!(bests[50] < 1e-2 * bests[0]);
    }
}
