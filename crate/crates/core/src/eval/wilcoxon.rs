//! One-tailed Wilcoxon signed-rank test for the alternative "a > b".

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Largest sample size for which the null distribution is enumerated exactly.
pub const EXACT_MAX_N: usize = 25;
const MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    /// Exact up to [`EXACT_MAX_N`], normal approximation above.
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero differences used.
    pub n: usize,
    /// Sum of the ranks of the negative differences.
    pub w: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

pub fn wilcoxon_one_tailed(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_one_tailed_with(a, b, PValueMethod::Auto)
}

pub fn wilcoxon_one_tailed_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(Error::InvalidConfig("samples contain NaN".into()));
    }
    let n = diffs.len();
    if n < MIN_N {
        return Err(Error::InsufficientData(format!(
            "{n} non-zero differences, need at least {MIN_N}"
        )));
    }

    let (ranks2, tie_sizes) = doubled_ranks(&diffs);
    let w2: u64 = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d < 0.0)
        .map(|(_, r)| *r)
        .sum();

    let method = match method {
        PValueMethod::Auto if n <= EXACT_MAX_N => PValueMethod::Exact,
        PValueMethod::Auto => PValueMethod::Normal,
        m => m,
    };
    if method == PValueMethod::Exact && n > 62 {
        return Err(Error::InvalidConfig(format!("exact p-value not available for n = {n}")));
    }
    let p_value = match method {
        PValueMethod::Exact => exact_lower_tail(&ranks2, w2),
        _ => normal_lower_tail(n, w2 as f64 / 2.0, &tie_sizes),
    };
    Ok(WilcoxonResult {
        n,
        w: w2 as f64 / 2.0,
        p_value,
        method,
    })
}

/// Twice the average rank of each `|d|` (integral even with ties), plus tie-group sizes.
fn doubled_ranks(diffs: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks2 = vec![0; diffs.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && diffs[order[end + 1]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // ranks start..=end are 1-based (start+1)..=(end+1)
        let r2 = (start + 1 + end + 1) as u64;
        for &k in &order[start..=end] {
            ranks2[k] = r2;
        }
        ties.push((end - start + 1) as u64);
        start = end + 1;
    }
    (ranks2, ties)
}

/// `P(W ≤ w)` over all 2ⁿ equally likely sign assignments, counted by
/// dynamic programming over attainable doubled rank sums.
fn exact_lower_tail(ranks2: &[u64], w2: u64) -> f64 {
    let total: u64 = ranks2.iter().sum();
    let mut ways = vec![0u64; total as usize + 1];
    ways[0] = 1;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if ways[s] > 0 {
                ways[s + r] += ways[s];
            }
        }
        reach += r;
    }
    let hits: u64 = ways[..=(w2 as usize).min(total as usize)].iter().sum();
    hits as f64 / 2f64.powi(ranks2.len() as i32)
}

/// Normal approximation with tie-corrected variance and continuity correction.
fn normal_lower_tail(n: usize, w: f64, tie_sizes: &[u64]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term).sqrt();
    let z = (w - mean + 0.5) / sd;
    let p = Normal::standard().cdf(z);
    p.clamp(f64::MIN_POSITIVE, 1.0)
}
