//! Core of the ARTEMIS triage suite.
//!
//! * [`data`]: ingest, clean, normalize, rebalance and synthesize triage-table records.
//! * [`models`]: the dense acuity network, a CART decision tree and the pairwise-feature ensemble.
//! * [`eval`]: per-class metrics, one-vs-all ROC/AUC and the Wilcoxon signed-rank comparison.
//! * [`report`]: the victim report exchanged between field robots and the command server.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the `f64` instantiation used by the rest of the workspace.

pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod report;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use data::{Acuity, Feature, RuleTable, TriageRecord, VitalSigns};
pub use report::{GeoPoint, VictimReport};

pub type NormalizationParams = data::NormalizationParams<f64>;
pub type MlpModel = models::Mlp<f64>;
pub type MlpGradients = models::Gradients<f64>;
pub type DecisionTree = models::DecisionTree<f64>;
pub type EnsembleModel = models::Ensemble<f64>;
pub type TriageLabel = models::TriageLabel<f64>;
pub type RocCurve = eval::RocCurve<f64>;
