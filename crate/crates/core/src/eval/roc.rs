use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Acuity;
use crate::{Error, Result, Scalar};

/// One-vs-all ROC curve for `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RocCurve<T> {
    pub positive: Acuity,
    /// `(false positive rate, true positive rate)` from (0,0) to (1,1).
    pub points: Vec<(T, T)>,
    pub auc: T,
}

/// Threshold sweep over the distinct scores in descending order, tied scores
/// entering together. The trapezoid area is accumulated in integer units, so
/// it equals `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)` exactly.
pub fn roc_auc<T: Scalar>(scores: &[T], truth: &[Acuity], positive: Acuity) -> Result<RocCurve<T>> {
    if scores.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidConfig("scores contain NaN".into()));
    }
    let n_pos = truth.iter().filter(|&&t| t == positive).count() as u64;
    let n_neg = truth.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InsufficientData(format!(
            "ROC for class {positive} needs both positive and negative examples"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));

    let (pos_t, neg_t) = (T::lit(n_pos as f64), T::lit(n_neg as f64));
    let mut points = vec![(T::zero(), T::zero())];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let (tp_prev, fp_prev) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] == positive {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        twice_area += u128::from(fp - fp_prev) * u128::from(tp + tp_prev);
        points.push((T::lit(fp as f64) / neg_t, T::lit(tp as f64) / pos_t));
    }
    let auc = T::lit(twice_area as f64) / T::lit(2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocCurve { positive, points, auc })
}

impl<T: Scalar> RocCurve<T> {
    /// `fpr,tpr` lines for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }
}
