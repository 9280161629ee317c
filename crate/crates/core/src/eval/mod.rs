//! Evaluation battery: per-class metrics, one-vs-all ROC and paired model comparison.

mod compare;
mod metrics;
mod roc;
mod wilcoxon;

pub use compare::{compare_models, ComparisonReport};
pub use metrics::{evaluate, ClassMetrics, MetricsReport};
pub use roc::{roc_auc, RocCurve};
pub use wilcoxon::{
    wilcoxon_one_tailed, wilcoxon_one_tailed_with, PValueMethod, WilcoxonResult, EXACT_MAX_N,
};
