use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::metrics::evaluate;
use super::wilcoxon::{wilcoxon_one_tailed, WilcoxonResult};
use crate::data::{Acuity, TriageRecord};
use crate::models::Classifier;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_subsets: usize,
    pub subset_size: usize,
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    /// Macro-averaged precision of each model on each subset.
    pub precision_a: Vec<f64>,
    pub precision_b: Vec<f64>,
    /// `None` when the test could not run; see `note`.
    pub test: Option<WilcoxonResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Scores both models on `n_subsets` random subsets (each drawn without
/// replacement, independently of the others) and tests whether model A's
/// macro precision exceeds model B's.
pub fn compare_models(
    model_a: &dyn Classifier,
    model_b: &dyn Classifier,
    dataset: &[TriageRecord],
    n_subsets: usize,
    subset_fraction: f64,
    seed: u64,
) -> Result<ComparisonReport> {
    if n_subsets < 5 {
        return Err(Error::InvalidConfig(format!("need at least 5 subsets, got {n_subsets}")));
    }
    if !(subset_fraction > 0.0 && subset_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("subset fraction {subset_fraction} not in (0, 1]")));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("comparison dataset"));
    }
    let predict_all = |m: &dyn Classifier| -> Result<Vec<Acuity>> {
        dataset.iter().map(|r| m.predict(&r.vitals)).collect()
    };
    let (pred_a, pred_b) = (predict_all(model_a)?, predict_all(model_b)?);

    let size = ((dataset.len() as f64 * subset_fraction).round() as usize).clamp(1, dataset.len());
    let mut precision_a = Vec::with_capacity(n_subsets);
    let mut precision_b = Vec::with_capacity(n_subsets);
    for s in 0..n_subsets {
        let mut rng = seed::rng(seed::derive(seed, s as u64));
        let picks = index::sample(&mut rng, dataset.len(), size);
        let truth: Vec<Acuity> = picks.iter().map(|i| dataset[i].acuity).collect();
        let a: Vec<Acuity> = picks.iter().map(|i| pred_a[i]).collect();
        let b: Vec<Acuity> = picks.iter().map(|i| pred_b[i]).collect();
        precision_a.push(evaluate(&a, &truth)?.macro_precision());
        precision_b.push(evaluate(&b, &truth)?.macro_precision());
    }

    let wins_a = precision_a.iter().zip(&precision_b).filter(|(a, b)| a > b).count();
    let wins_b = precision_a.iter().zip(&precision_b).filter(|(a, b)| a < b).count();
    let (test, note) = match wilcoxon_one_tailed(&precision_a, &precision_b) {
        Ok(t) => (Some(t), None),
        Err(Error::InsufficientData(msg)) => (None, Some(format!("insufficient data: {msg}"))),
        Err(e) => return Err(e),
    };
    Ok(ComparisonReport {
        n_subsets,
        subset_size: size,
        wins_a,
        wins_b,
        ties: n_subsets - wins_a - wins_b,
        precision_a,
        precision_b,
        test,
        note,
    })
}
