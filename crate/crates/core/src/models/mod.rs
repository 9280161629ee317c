//! Acuity classifiers.

mod ensemble;
mod inference;
mod mlp;
mod persist;
mod train;
mod tree;

pub use ensemble::{ensemble_fit, ensemble_predict, feature_pairs, tally_votes, Ensemble, WeakLearner};
pub use inference::{classify_vitals, Classifier};
pub use mlp::{mlp_init, softmax, Dense, Gradients, Mlp, TriageLabel, DEFAULT_HIDDEN};
pub use persist::{load_model, save_model, ModelFile};
pub use train::{mlp_train, TrainConfig};
pub use tree::{gini_impurity, tree_fit, tree_predict, DecisionTree, Node, TreeConfig};
