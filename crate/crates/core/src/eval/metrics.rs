use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Acuity;
use crate::{Error, Result};

/// One-vs-all confusion counts and derived scores for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Acuity,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl ClassMetrics {
    pub fn from_counts(class: Acuity, tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        let mut undefined = Vec::new();
        let ratio = |num: u64, den: u64, name: &str, undefined: &mut Vec<String>| {
            if den == 0 {
                undefined.push(name.to_owned());
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp, "precision", &mut undefined);
        let recall = ratio(tp, tp + fn_, "recall", &mut undefined);
        let f1 = if precision + recall == 0.0 {
            undefined.push("f1".to_owned());
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            class,
            tp,
            tn,
            fp,
            fn_,
            precision,
            recall,
            f1,
            undefined,
        }
    }

    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: u64,
    pub accuracy: f64,
    pub classes: Vec<ClassMetrics>,
}

/// One-vs-all metrics for every acuity class.
pub fn evaluate(predictions: &[Acuity], truth: &[Acuity]) -> Result<MetricsReport> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut confusion = [[0u64; Acuity::COUNT]; Acuity::COUNT];
    for (p, t) in predictions.iter().zip(truth) {
        confusion[t.index()][p.index()] += 1;
    }
    let n = truth.len() as u64;
    let classes = Acuity::ALL
        .iter()
        .map(|&c| {
            let k = c.index();
            let tp = confusion[k][k];
            let fn_ = confusion[k].iter().sum::<u64>() - tp;
            let fp = (0..Acuity::COUNT).map(|t| confusion[t][k]).sum::<u64>() - tp;
            ClassMetrics::from_counts(c, tp, n - tp - fn_ - fp, fp, fn_)
        })
        .collect::<Vec<_>>();
    let correct: u64 = classes.iter().map(|c| c.tp).sum();
    Ok(MetricsReport {
        n,
        accuracy: correct as f64 / n as f64,
        classes,
    })
}

impl MetricsReport {
    /// Mean precision over the classes that occur in the truth or the predictions.
    pub fn macro_precision(&self) -> f64 {
        let seen: Vec<&ClassMetrics> = self.classes.iter().filter(|c| c.tp + c.fp + c.fn_ > 0).collect();
        if seen.is_empty() {
            return 0.0;
        }
        seen.iter().map(|c| c.precision).sum::<f64>() / seen.len() as f64
    }

    /// Aligned plain-text table with one row per class.
    pub fn to_table(&self, model: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7} {:>8}",
            "Model", "Accuracy", "class", "TP", "TN", "FP", "FN", "Precision", "Recall", "F1_score"
        );
        for (i, c) in self.classes.iter().enumerate() {
            let (name, acc) = if i == 0 {
                (model.to_owned(), format!("{:.0}%", self.accuracy * 100.0))
            } else {
                (String::new(), String::new())
            };
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>9.4} {:>7.4} {:>8.4}",
                name, acc, c.class, c.tp, c.tn, c.fp, c.fn_, c.precision, c.recall, c.f1
            );
        }
        out
    }
}
