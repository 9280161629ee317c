//! Signed-rank p-values against brute-force enumeration of all 2ⁿ sign
//! assignments, and the normal approximation against the exact value.

use artemis_core::eval::{wilcoxon_one_tailed, wilcoxon_one_tailed_with, PValueMethod};
use rand::Rng;

/// Average ranks of |d| (ties share the mean rank).
fn midranks(diffs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..diffs.len()).collect();
    idx.sort_by(|&a, &b| diffs[a].abs().partial_cmp(&diffs[b].abs()).unwrap());
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && diffs[idx[j + 1]].abs() == diffs[idx[i]].abs() {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// P(W⁻ ≤ observed) under random signs, by enumeration.
fn brute_force_p(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let ranks = midranks(&diffs);
    let observed: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let n = diffs.len();
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            at_most += 1;
        }
    }
    (observed, at_most as f64 / (1u64 << n) as f64)
}

#[test]
fn exact_p_matches_enumeration() {
    let mut rng = artemis_core::seed::rng(5);
    for case in 0..60 {
        let n = rng.random_range(5..=16);
        let shift = rng.random_range(-0.3..0.6);
        // Rounded values produce ties among |d| and some zero differences.
        let a: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..1.0f64) * 10.0).round() / 10.0 + shift).collect();
        let b: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..1.0f64) * 10.0).round() / 10.0).collect();
        let nonzero = a.iter().zip(&b).filter(|(x, y)| *x - *y != 0.0).count();
        if nonzero < 5 {
            continue;
        }
        let got = wilcoxon_one_tailed_with(&a, &b, PValueMethod::Exact).unwrap();
        let (w, p) = brute_force_p(&a, &b);
        assert_eq!(got.n, nonzero);
        assert!((got.w - w).abs() < 1e-9, "case {case}: W {} vs {w}", got.w);
        assert!((got.p_value - p).abs() < 1e-12, "case {case}: p {} vs {p}", got.p_value);
    }
}

#[test]
fn normal_approximation_tracks_exact_for_moderate_n() {
    let mut rng = artemis_core::seed::rng(11);
    for n in 20..=25 {
        for _ in 0..20 {
            let shift = rng.random_range(-0.5..0.5);
            let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + shift).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let exact = wilcoxon_one_tailed_with(&a, &b, PValueMethod::Exact).unwrap();
            let approx = wilcoxon_one_tailed_with(&a, &b, PValueMethod::Normal).unwrap();
            assert!(
                (exact.p_value - approx.p_value).abs() < 0.01,
                "n={n}: exact {} normal {}",
                exact.p_value,
                approx.p_value
            );
        }
    }
}

#[test]
fn all_positive_differences_give_smallest_p() {
    let a: Vec<f64> = (1..=10).map(|v| v as f64 + 1.0).collect();
    let b: Vec<f64> = (1..=10).map(|v| v as f64).collect();
    let r = wilcoxon_one_tailed(&a, &b).unwrap();
    assert_eq!(r.w, 0.0);
    assert!((r.p_value - 1.0 / 1024.0).abs() < 1e-15);
}

#[test]
fn auto_switches_to_normal_above_limit() {
    let a: Vec<f64> = (0..40).map(|v| v as f64 * 0.1 + 0.05).collect();
    let b: Vec<f64> = (0..40).map(|v| v as f64 * 0.1).collect();
    assert_eq!(wilcoxon_one_tailed(&a, &b).unwrap().method, PValueMethod::Normal);
    assert_eq!(wilcoxon_one_tailed(&a[..10], &b[..10]).unwrap().method, PValueMethod::Exact);
}
