//! Bound-constrained limited-memory quasi-Newton descent on numerical
//! gradients.
//!
//! Steps are projected onto the box and accepted by Armijo backtracking.
//! Where the objective is piecewise constant (snapped designs) the central
//! difference gradient vanishes; the search then probes each coordinate by
//! a fixed fraction of its range instead.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{OptimizeError, Tracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalSearchConfig {
    /// Relative finite-difference step.
    pub eps: f64,
    /// Stored correction pairs.
    pub memory: usize,
    /// Charged evaluations one call may spend.
    pub max_evals: usize,
    /// Coordinate probe step as a fraction of the range.
    pub probe_fraction: f64,
    pub armijo_c: f64,
    pub max_backtracks: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self { eps: 1e-8, memory: 10, max_evals: 200, probe_fraction: 0.05, armijo_c: 1e-4, max_backtracks: 20 }
    }
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central differences with step `eps·max(1, |x_i|)`, one-sided at a bound.
/// `None` if the budget could not pay for every probe.
pub fn finite_difference_gradient(
    x: &[f64],
    eps: f64,
    tracker: &mut Tracker,
) -> Result<Option<Vec<f64>>, OptimizeError> {
    let bounds = tracker.bounds().to_vec();
    let mut points = Vec::with_capacity(2 * x.len());
    let mut steps = Vec::with_capacity(x.len());
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let h = eps * x[i].abs().max(1.0);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[i] = (x[i] + h).min(hi);
        minus[i] = (x[i] - h).max(lo);
        steps.push(plus[i] - minus[i]);
        points.push(plus);
        points.push(minus);
    }
    let fs = tracker.eval_batch(&points)?;
    if fs.iter().any(Option::is_none) {
        return Ok(None);
    }
    Ok(Some(
        (0..x.len())
            .map(|i| {
                let (fp, fm) = (fs[2 * i].unwrap(), fs[2 * i + 1].unwrap());
                if steps[i] > 0.0 {
                    (fp - fm) / steps[i]
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

/// One pass of ±step probes per coordinate, keeping every improvement.
fn coordinate_probe(
    x: &mut Vec<f64>,
    f: &mut f64,
    cfg: &LocalSearchConfig,
    tracker: &mut Tracker,
    start_used: usize,
) -> Result<bool, OptimizeError> {
    let bounds = tracker.bounds().to_vec();
    let mut improved = false;
    for i in 0..x.len() {
        let (lo, hi) = bounds[i];
        let step = cfg.probe_fraction * (hi - lo);
        if step <= 0.0 {
            continue;
        }
        for dir in [1.0, -1.0] {
            if tracker.used() - start_used >= cfg.max_evals {
                return Ok(improved);
            }
            let mut y = x.clone();
            y[i] = (x[i] + dir * step).clamp(lo, hi);
            if y[i] == x[i] {
                continue;
            }
            match tracker.eval(&y)? {
                Some(fy) if fy < *f => {
                    *x = y;
                    *f = fy;
                    improved = true;
                    break;
                }
                Some(_) => {}
                None => return Ok(improved),
            }
        }
    }
    Ok(improved)
}

/// Descends from `(x0, f0)` and returns the best point seen, never worse
/// than the start.
pub fn local_search(
    x0: &[f64],
    f0: f64,
    cfg: &LocalSearchConfig,
    tracker: &mut Tracker,
) -> Result<(Vec<f64>, f64), OptimizeError> {
    let bounds = tracker.bounds().to_vec();
    let start_used = tracker.used();
    let spent = |t: &Tracker| t.used() - start_used >= cfg.max_evals || t.exhausted();
    let mut x = x0.to_vec();
    let mut f = f0;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    let Some(mut g) = finite_difference_gradient(&x, cfg.eps, tracker)? else {
        return Ok((x, f));
    };
    while !spent(tracker) {
        // Projected gradient: components pushing against an active bound do not count.
        let pg: Vec<f64> = (0..x.len())
            .map(|i| {
                let (lo, hi) = bounds[i];
                if (x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0) {
                    0.0
                } else {
                    g[i]
                }
            })
            .collect();
        if pg.iter().all(|&v| v == 0.0) {
            if !coordinate_probe(&mut x, &mut f, cfg, tracker, start_used)? {
                break;
            }
            pairs.clear();
            match finite_difference_gradient(&x, cfg.eps, tracker)? {
                Some(ng) => g = ng,
                None => break,
            }
            continue;
        }

        // Two-loop recursion.
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = pairs.back().map_or_else(
            || {
                // First step: move at most a tenth of the box along the gradient.
                let gmax = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let span = bounds.iter().map(|(lo, hi)| hi - lo).fold(f64::INFINITY, f64::min);
                if gmax > 0.0 && span.is_finite() {
                    (0.1 * span / gmax).min(1.0)
                } else {
                    1.0
                }
            },
            |(s, y, _)| dot(s, y) / dot(y, y),
        );
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        for i in 0..d.len() {
            if pg[i] == 0.0 {
                d[i] = 0.0;
            }
        }
        if dot(&d, &pg) >= 0.0 {
            pairs.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            if spent(tracker) {
                break;
            }
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            project(&mut y, &bounds);
            let decrease = dot(&g, &y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            if y == x {
                break;
            }
            match tracker.eval(&y)? {
                Some(fy) if fy <= f + cfg.armijo_c * decrease && fy < f => {
                    accepted = Some((y, fy));
                    break;
                }
                Some(_) => step *= 0.5,
                None => break,
            }
        }
        let Some((y, fy)) = accepted else {
            // Quasi-Newton direction failed; try the coordinate probe once.
            if !coordinate_probe(&mut x, &mut f, cfg, tracker, start_used)? {
                break;
            }
            pairs.clear();
            match finite_difference_gradient(&x, cfg.eps, tracker)? {
                Some(ng) => g = ng,
                None => break,
            }
            continue;
        };
        let Some(gy) = finite_difference_gradient(&y, cfg.eps, tracker)? else {
            x = y;
            f = fy;
            break;
        };
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, yv, 1.0 / sy));
        }
        x = y;
        f = fy;
        g = gy;
    }
    Ok((x, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::bench::Sphere;
    use crate::optimize::{BudgetMode, Objective};

    #[test]
    fn gradient_of_sphere() {
        let s = Sphere::new(2, 0.0, 10.0, 0);
        let mut t = Tracker::new(&s, 100, BudgetMode::AllCalls);
        let g = finite_difference_gradient(&[1.0, 2.0], 1e-8, &mut t).unwrap().unwrap();
        assert!((g[0] - 2.0).abs() < 1e-5 && (g[1] - 4.0).abs() < 1e-5, "{g:?}");
    }

    #[test]
    fn converges_on_sphere() {
        let s = Sphere::new(3, 0.0, 5.0, 0);
        let mut t = Tracker::new(&s, 200, BudgetMode::AllCalls);
        let x0 = [1.0, 1.0, 1.0];
        let f0 = t.eval(&x0).unwrap().unwrap();
        let cfg = LocalSearchConfig { max_evals: 199, ..Default::default() };
        let (x, _) = local_search(&x0, f0, &cfg, &mut t).unwrap();
        assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-3, "{x:?}");
        assert!(t.used() <= 200);
    }

    #[test]
    fn stays_at_the_minimum() {
        let s = Sphere::new(3, 0.0, 5.0, 0);
        let mut t = Tracker::new(&s, 500, BudgetMode::AllCalls);
        let x0 = [0.0, 0.0, 0.0];
        let (x, f) = local_search(&x0, 0.0, &LocalSearchConfig::default(), &mut t).unwrap();
        assert_eq!((x.as_slice(), f), (&x0[..], 0.0));
    }

    #[test]
    fn respects_bounds() {
        // Minimum outside the box at (−3, −3); the box stops at −1.
        struct Off;
        impl Objective for Off {
            fn bounds(&self) -> &[(f64, f64)] {
                &[(-1.0, 1.0), (-1.0, 1.0)]
            }
            fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
                Ok((x[0] + 3.0).powi(2) + (x[1] + 3.0).powi(2))
            }
        }
        let mut t = Tracker::new(&Off, 500, BudgetMode::AllCalls);
        let f0 = t.eval(&[0.5, 0.5]).unwrap().unwrap();
        let (x, _) = local_search(&[0.5, 0.5], f0, &LocalSearchConfig::default(), &mut t).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-9 && (x[1] + 1.0).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn plateaus_fall_back_to_probing() {
        struct Steps;
        impl Objective for Steps {
            fn bounds(&self) -> &[(f64, f64)] {
                &[(0.0, 10.0), (0.0, 10.0)]
            }
            fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
                Ok(x[0].floor() + x[1].floor())
            }
        }
        let mut t = Tracker::new(&Steps, 500, BudgetMode::AllCalls);
        let f0 = t.eval(&[5.2, 5.2]).unwrap().unwrap();
        let (_, f) = local_search(&[5.2, 5.2], f0, &LocalSearchConfig::default(), &mut t).unwrap();
        assert!(f < f0);
    }
}
