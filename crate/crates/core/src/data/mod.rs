//! Triage-table ingestion, cleaning and exploratory analysis.

mod analysis;
mod io;
mod normalize;
mod preprocess;
mod records;
mod rules;
mod sampling;
mod synth;

pub use analysis::{bin_distribution, correlate_with_acuity, pearson_correlation, Bin, FeatureCorrelation};
pub use io::{
    load_records, load_records_delimited, read_records, write_records, write_records_to, Diagnostic,
    LoadOutcome,
};
pub use normalize::{apply_normalizer, fit_normalizer, FeatureSource, NormalizationParams};
pub use preprocess::{preprocess, PreprocessReport};
pub use records::{
    feature_matrix, labels, Acuity, Feature, RawRecord, TriageRecord, VitalSigns, ENSEMBLE_FEATURES,
    MAIN_FEATURES,
};
pub use rules::{label_by_rule, Clause, Condition, RuleTable};
pub use sampling::{rebalance, split};
pub use synth::{synthesize, synthesize_with_templates, ClassMix, ClassTemplates, NoiseSigmas, Template};
