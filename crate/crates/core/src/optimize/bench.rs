//! Shifted benchmark functions for exercising the optimizers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Objective;

fn shift(dim: usize, shift_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| if shift_max > 0.0 { rng.random_range(-shift_max..=shift_max) } else { 0.0 })
        .collect()
}

/// `Σ (x_i − o_i)²` on `[−half_width, half_width]^dim`.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub offset: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl Sphere {
    /// Offset drawn uniformly from `[−shift_max, shift_max]` per coordinate.
    pub fn new(dim: usize, shift_max: f64, half_width: f64, seed: u64) -> Self {
        Self { offset: shift(dim, shift_max, seed), bounds: vec![(-half_width, half_width); dim] }
    }
}

impl Objective for Sphere {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
        Ok(x.iter().zip(&self.offset).map(|(a, o)| (a - o).powi(2)).sum())
    }
}

/// `10d + Σ (z_i² − 10 cos 2πz_i)` with `z = x − o`.
#[derive(Clone, Debug)]
pub struct Rastrigin {
    pub offset: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl Rastrigin {
    pub fn new(dim: usize, shift_max: f64, half_width: f64, seed: u64) -> Self {
        Self { offset: shift(dim, shift_max, seed), bounds: vec![(-half_width, half_width); dim] }
    }
}

impl Objective for Rastrigin {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
        let d = x.len() as f64;
        Ok(10.0 * d
            + x.iter()
                .zip(&self.offset)
                .map(|(a, o)| {
                    let z = a - o;
                    z * z - 10.0 * (2.0 * PI * z).cos()
                })
                .sum::<f64>())
    }
}
