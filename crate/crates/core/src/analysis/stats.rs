//! Rank tests, multiple-comparison correction and descriptive statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::AnalysisError;

/// Smallest sample the rank-sum test accepts.
pub const MIN_SAMPLE: usize = 5;
/// `Auto` uses the exact distribution up to this size per side.
pub const EXACT_MAX_SIDE: usize = 12;
/// Signed-rank `Auto` is exact up to this many nonzero differences.
pub const EXACT_MAX_PAIRS: usize = 50;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankTest {
    RankSum,
    SignedRank,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: RankTest,
    /// `Exact` or `Normal`; never `Auto`.
    pub method: Method,
    /// Rank sum of the first sample, or the positive signed-rank sum.
    pub statistic: f64,
    pub p_value: f64,
}

/// Midranks (1-based) of `values`, plus the sizes of every tie group.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn two_sided(lower: f64, upper: f64) -> f64 {
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(statistic: f64, mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * std_normal.sf(z)).min(1.0)
}

/// Exact two-sided p of the rank-sum of `a` against `b`, midranks for ties.
/// Counts subsets of the pooled (doubled, hence integer) ranks by their sum.
pub fn exact_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let n = a.len();
    let observed: usize = doubled[..n].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s.
    let mut ways = vec![vec![0u128; max_sum + 1]; n + 1];
    ways[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add > 0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let total: u128 = ways[n].iter().sum();
    let lower: u128 = ways[n][..=observed].iter().sum();
    let upper: u128 = ways[n][observed..].iter().sum();
    two_sided(lower as f64 / total as f64, upper as f64 / total as f64)
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney) test.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], method: Method) -> Result<TestOutcome, AnalysisError> {
    if a.len() < MIN_SAMPLE || b.len() < MIN_SAMPLE {
        return Err(AnalysisError::TooFewRows { needed: MIN_SAMPLE, got: a.len().min(b.len()) });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    if a.iter().chain(b).all(|&v| v == a[0]) {
        return Err(AnalysisError::DegenerateSamples);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let statistic: f64 = ranks[..a.len()].iter().sum();
    let method = match method {
        Method::Auto if a.len() <= EXACT_MAX_SIDE && b.len() <= EXACT_MAX_SIDE => Method::Exact,
        Method::Auto => Method::Normal,
        m => m,
    };
    let p_value = match method {
        Method::Exact => exact_rank_sum_p(a, b),
        _ => {
            let (n, m) = (a.len() as f64, b.len() as f64);
            let total = n + m;
            let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (total * (total - 1.0));
            normal_p(statistic, n * (total + 1.0) / 2.0, n * m / 12.0 * ((total + 1.0) - tie_term))
        }
    };
    Ok(TestOutcome { test: RankTest::RankSum, method, statistic, p_value })
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], method: Method) -> Result<TestOutcome, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::Unpaired { left: a.len(), right: b.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(AnalysisError::DegenerateSamples);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    let statistic: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let method = match method {
        Method::Auto if diffs.len() <= EXACT_MAX_PAIRS => Method::Exact,
        Method::Auto => Method::Normal,
        m => m,
    };
    let p_value = match method {
        Method::Exact => {
            // Every sign assignment is equally likely under the null.
            let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
            let max_sum: usize = doubled.iter().sum();
            let mut ways = vec![0u128; max_sum + 1];
            ways[0] = 1;
            for &r in &doubled {
                for s in (r..=max_sum).rev() {
                    ways[s] += ways[s - r];
                }
            }
            let observed = (2.0 * statistic).round() as usize;
            let total: u128 = ways.iter().sum();
            let lower: u128 = ways[..=observed].iter().sum();
            let upper: u128 = ways[observed..].iter().sum();
            two_sided(lower as f64 / total as f64, upper as f64 / total as f64)
        }
        _ => {
            let n = diffs.len() as f64;
            let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
            normal_p(statistic, n * (n + 1.0) / 4.0, n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term)
        }
    };
    Ok(TestOutcome { test: RankTest::SignedRank, method, statistic, p_value })
}

/// Significance flags with the family-wise level split over all tests.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let threshold = alpha / p_values.len().max(1) as f64;
    p_values.iter().map(|&p| p < threshold).collect()
}

/// Quantile by linear interpolation between order statistics of `sorted`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variability {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation (divides by N).
    pub sigma: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

pub fn variability(values: &[f64]) -> Result<Variability, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewRows { needed: 2, got: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Variability {
        n: values.len(),
        mean,
        sigma,
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}
