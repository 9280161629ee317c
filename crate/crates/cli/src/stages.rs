//! One function per pipeline stage. Each reads its inputs from files, writes
//! its outputs to files and derives its random streams from the run seed, so
//! a stage run on its own and the same stage inside a manifest run produce
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use artemis_core::data::{
    bin_distribution, correlate_with_acuity, feature_matrix, fit_normalizer, labels, load_records,
    load_records_delimited, preprocess, rebalance, split, synthesize, write_records, Bin, ClassMix,
    Diagnostic, FeatureCorrelation, NoiseSigmas, PreprocessReport, ENSEMBLE_FEATURES, MAIN_FEATURES,
};
use artemis_core::eval::{compare_models, evaluate, roc_auc, ClassMetrics, ComparisonReport};
use artemis_core::models::{
    ensemble_fit, load_model, mlp_init, mlp_train, save_model, tree_fit, ModelFile, TrainConfig, TreeConfig,
    DEFAULT_HIDDEN,
};
use artemis_core::{seed, Acuity, Feature, RuleTable, TriageRecord};
use artemis_sim::{
    demo_scenario, load_scenario, run_mission, Collector, HttpSink, MissionConfig, MissionLog, ReportSink,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Tree,
    Ensemble,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Tree => "tree",
            ModelKind::Ensemble => "ensemble",
        }
    }
}

/// Core I/O errors raised while writing are runtime failures, not bad input.
fn output_error(e: artemis_core::Error) -> CliError {
    match e {
        artemis_core::Error::Io { path, source } => CliError::write(path, source),
        other => other.into(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Loads a table that must already be clean: every row parses and has all six vitals.
pub fn load_dataset(path: &Path) -> Result<Vec<TriageRecord>> {
    let outcome = load_records(path)?;
    if let Some(d) = outcome.diagnostics.first() {
        return Err(CliError::Data(format!(
            "{}: row {}: {} ({} unusable rows; run `artemis preprocess` first)",
            path.display(),
            d.row,
            d.message,
            outcome.diagnostics.len()
        )));
    }
    outcome
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.complete().ok_or_else(|| {
                CliError::Data(format!(
                    "{}: row {} has missing values; run `artemis preprocess` first",
                    path.display(),
                    i + 1
                ))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessSummary {
    #[serde(flatten)]
    pub counts: PreprocessReport,
    /// Rows that could not be parsed at all; they are not part of `input_count`.
    pub unparsable_rows: Vec<Diagnostic>,
}

pub fn preprocess_file(
    input: &Path,
    output: &Path,
    report: Option<&Path>,
    delimiter: u8,
) -> Result<PreprocessSummary> {
    let loaded = load_records_delimited(input, delimiter)?;
    for d in &loaded.diagnostics {
        log::warn!("{}: row {}: {}", input.display(), d.row, d.message);
    }
    let (clean, counts) = preprocess(&loaded.records);
    write_records(output, &clean).map_err(output_error)?;
    let summary = PreprocessSummary {
        counts,
        unparsable_rows: loaded.diagnostics,
    };
    if let Some(path) = report {
        write_json(path, &summary)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureBins {
    pub feature: Feature,
    pub width: f64,
    pub bins: Vec<Bin>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub records: usize,
    /// Index = acuity level − 1.
    pub class_counts: [usize; Acuity::COUNT],
    pub correlations: Vec<FeatureCorrelation>,
    pub distributions: Vec<FeatureBins>,
}

/// Histogram bin width used when none is given.
pub fn default_bin_width(feature: Feature) -> f64 {
    match feature {
        Feature::Temperature => 1.0,
        Feature::HeartRate => 10.0,
        Feature::RespRate => 2.0,
        Feature::O2Sat => 1.0,
        Feature::Sbp | Feature::Dbp => 10.0,
    }
}

pub fn analyze_file(input: &Path, output: &Path, bin_width: Option<f64>) -> Result<Analysis> {
    let records = load_dataset(input)?;
    let mut class_counts = [0; Acuity::COUNT];
    for r in &records {
        class_counts[r.acuity.index()] += 1;
    }
    let correlations = correlate_with_acuity(&records, &Feature::ALL)?;
    let distributions = Feature::ALL
        .iter()
        .map(|&feature| {
            let width = bin_width.unwrap_or_else(|| default_bin_width(feature));
            Ok(FeatureBins {
                feature,
                width,
                bins: bin_distribution(&records, feature, width)?,
            })
        })
        .collect::<Result<_>>()?;
    let analysis = Analysis {
        records: records.len(),
        class_counts,
        correlations,
        distributions,
    };
    write_json(output, &analysis)?;
    Ok(analysis)
}

pub fn synthesize_file(output: &Path, count: usize, mix: &ClassMix, run_seed: u64) -> Result<Vec<TriageRecord>> {
    let records = synthesize(
        count,
        mix,
        &NoiseSigmas::default(),
        &RuleTable::default(),
        seed::derive(run_seed, seed::stage::SYNTHESIZE),
    )?;
    write_records(output, &records).map_err(output_error)?;
    Ok(records)
}

/// Parses `w1,w2,w3,w4,w5` class weights.
pub fn parse_mix(text: &str) -> Result<ClassMix> {
    let weights: Vec<f64> = text
        .split(',')
        .map(|w| w.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--mix: {e}")))?;
    let weights: [f64; Acuity::COUNT] = weights
        .try_into()
        .map_err(|w: Vec<f64>| CliError::Usage(format!("--mix needs 5 weights, got {}", w.len())))?;
    let mix = ClassMix(weights);
    mix.validate().map_err(|e| CliError::Usage(format!("--mix: {e}")))?;
    Ok(mix)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Tree depth limit; `None` grows to purity.
    pub max_depth: Option<usize>,
    /// Oversample minority classes of the training split.
    pub rebalance: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        let c = TrainConfig::default();
        TrainParams {
            epochs: c.epochs,
            learning_rate: c.learning_rate,
            batch_size: c.batch_size,
            max_depth: None,
            rebalance: false,
        }
    }
}

pub struct Trained {
    pub model: ModelFile<f64>,
    /// Mean training loss per epoch; empty for trees.
    pub history: Vec<f64>,
}

/// `(train, holdout)` with the run's split stream.
pub fn split_dataset(
    records: &[TriageRecord],
    ratio: f64,
    run_seed: u64,
) -> Result<(Vec<TriageRecord>, Vec<TriageRecord>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CliError::Usage(format!("split ratio {ratio} must be in (0, 1)")));
    }
    Ok(split(records, ratio, seed::derive(run_seed, seed::stage::SPLIT))?)
}

pub fn train_model(
    records: &[TriageRecord],
    kind: ModelKind,
    params: &TrainParams,
    run_seed: u64,
) -> Result<Trained> {
    if records.is_empty() {
        return Err(CliError::Data("training set is empty".into()));
    }
    let balanced;
    let records = if params.rebalance {
        balanced = rebalance(records, seed::derive(run_seed, seed::stage::REBALANCE));
        &balanced[..]
    } else {
        records
    };
    let y = labels(records);
    let config = |stage| TrainConfig {
        learning_rate: params.learning_rate,
        batch_size: params.batch_size,
        epochs: params.epochs,
        seed: seed::derive(run_seed, stage),
    };
    Ok(match kind {
        ModelKind::Mlp => {
            let config = config(seed::stage::TRAIN_MLP);
            let normalizer = fit_normalizer(records, &MAIN_FEATURES)?;
            let x = normalizer.apply(records)?;
            let init = mlp_init(MAIN_FEATURES.len(), &DEFAULT_HIDDEN, config.seed)?;
            let (net, history) = mlp_train(&init, &x, &y, &config)?;
            Trained {
                model: ModelFile::from(&net.with_normalizer(normalizer)),
                history,
            }
        }
        ModelKind::Tree => {
            let config = TreeConfig {
                max_depth: params.max_depth,
                ..TreeConfig::default()
            };
            let tree = tree_fit(&feature_matrix(records, &MAIN_FEATURES), &y, &config)?.with_features(&MAIN_FEATURES);
            Trained {
                model: ModelFile::from(&tree),
                history: Vec::new(),
            }
        }
        ModelKind::Ensemble => {
            let config = config(seed::stage::TRAIN_ENSEMBLE);
            let normalizer = fit_normalizer(records, &ENSEMBLE_FEATURES)?;
            let x = normalizer.apply(records)?;
            let ensemble = ensemble_fit(&x, &y, &config, config.seed)?.with_normalizer(normalizer);
            Trained {
                model: ModelFile::from(&ensemble),
                history: Vec::new(),
            }
        }
    })
}

pub fn save_trained(trained: &Trained, model: &Path, history: Option<&Path>) -> Result<()> {
    save_model(model, &trained.model).map_err(output_error)?;
    if let Some(path) = history {
        write_json(path, &trained.history)?;
    }
    Ok(())
}

pub fn write_dataset(path: &Path, records: &[TriageRecord]) -> Result<()> {
    write_records(path, records).map_err(output_error)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAuc {
    pub class: Acuity,
    pub auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub records: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub classes: Vec<ClassMetrics>,
    pub roc: Vec<ClassAuc>,
}

impl EvaluationReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("{} on {} records\n", self.model, self.records);
        let metrics = artemis_core::eval::MetricsReport {
            n: self.records as u64,
            accuracy: self.accuracy,
            classes: self.classes.clone(),
        };
        out.push_str(&metrics.to_table(&self.model));
        let _ = writeln!(out, "macro precision {:.4}", self.macro_precision);
        for r in &self.roc {
            match r.auc {
                Some(auc) => {
                    let _ = writeln!(out, "AUC class {}: {auc:.4}", r.class);
                }
                None => {
                    let _ = writeln!(out, "AUC class {}: n/a ({})", r.class, r.note.as_deref().unwrap_or(""));
                }
            }
        }
        out
    }
}

pub fn evaluate_file(model: &Path, input: &Path, output: Option<&Path>, roc_csv: Option<&Path>) -> Result<EvaluationReport> {
    let file = load_model::<f64>(model)?;
    let format = file.format().to_owned();
    let classifier = file.into_classifier()?;
    let records = load_dataset(input)?;
    if records.is_empty() {
        return Err(CliError::Data(format!("{}: no records to evaluate", input.display())));
    }
    let truth = labels(&records);
    let predictions = records
        .iter()
        .map(|r| classifier.predict(&r.vitals))
        .collect::<artemis_core::Result<Vec<_>>>()?;
    let scores = records
        .iter()
        .map(|r| classifier.scores(&r.vitals))
        .collect::<artemis_core::Result<Vec<_>>>()?;
    let metrics = evaluate(&predictions, &truth)?;

    let mut roc = Vec::new();
    let mut csv = String::from("class,fpr,tpr\n");
    for class in Acuity::ALL {
        let positives = truth.iter().filter(|&&t| t == class).count();
        if positives == 0 || positives == truth.len() {
            let note = if positives == 0 { "no positive cases" } else { "no negative cases" };
            roc.push(ClassAuc {
                class,
                auc: None,
                note: Some(note.into()),
            });
            continue;
        }
        let column: Vec<f64> = scores.iter().map(|s| s[class.index()]).collect();
        let curve = roc_auc(&column, &truth, class)?;
        for (fpr, tpr) in &curve.points {
            let _ = writeln!(csv, "{},{fpr},{tpr}", class.level());
        }
        roc.push(ClassAuc {
            class,
            auc: Some(curve.auc),
            note: None,
        });
    }
    let report = EvaluationReport {
        model: format,
        records: records.len(),
        accuracy: metrics.accuracy,
        macro_precision: metrics.macro_precision(),
        classes: metrics.classes,
        roc,
    };
    if let Some(path) = output {
        write_json(path, &report)?;
    }
    if let Some(path) = roc_csv {
        fs::write(path, csv).map_err(|e| CliError::write(path, e))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model_a: String,
    pub model_b: String,
    #[serde(flatten)]
    pub report: ComparisonReport,
}

pub struct CompareParams {
    pub subsets: usize,
    pub fraction: f64,
}

pub fn compare_files(
    model_a: &Path,
    model_b: &Path,
    input: &Path,
    output: Option<&Path>,
    params: &CompareParams,
    run_seed: u64,
) -> Result<Comparison> {
    let a = load_model::<f64>(model_a)?;
    let b = load_model::<f64>(model_b)?;
    let (format_a, format_b) = (a.format().to_owned(), b.format().to_owned());
    let (a, b) = (a.into_classifier()?, b.into_classifier()?);
    let records = load_dataset(input)?;
    let report = compare_models(
        a.as_ref(),
        b.as_ref(),
        &records,
        params.subsets,
        params.fraction,
        seed::derive(run_seed, seed::stage::COMPARE),
    )?;
    let comparison = Comparison {
        model_a: format_a,
        model_b: format_b,
        report,
    };
    if let Some(path) = output {
        write_json(path, &comparison)?;
    }
    Ok(comparison)
}

pub struct SimulateParams<'a> {
    /// `None` runs the built-in demo scenario.
    pub scenario: Option<&'a Path>,
    pub server_url: Option<&'a str>,
    /// Replaces the scenario's own seed.
    pub seed: Option<u64>,
    pub config: MissionConfig,
}

/// Runs a mission and writes its JSON-lines log. Reports that could not be
/// delivered to the server are logged and turn into a runtime error after
/// the log is written.
pub fn simulate_file(model: &Path, output: &Path, params: &SimulateParams) -> Result<MissionLog> {
    let classifier = load_model::<f64>(model)?.into_classifier()?;
    let mut scenario = match params.scenario {
        Some(path) => load_scenario(path)?,
        None => demo_scenario(),
    };
    if let Some(s) = params.seed {
        scenario.seed = s;
    }
    let mut collector = Collector::default();
    let mut http;
    let sink: &mut dyn ReportSink = match params.server_url {
        Some(url) => {
            http = HttpSink::new(url).map_err(|e| CliError::Runtime(format!("server client: {e}")))?;
            &mut http
        }
        None => &mut collector,
    };
    let log = run_mission(&scenario, classifier.as_ref(), sink, &params.config)?;
    log.write_jsonl(output).map_err(|e| match e {
        artemis_sim::SimError::Io { path, source } => CliError::write(path, source),
        other => other.into(),
    })?;
    if !log.complete {
        log::warn!("mission stopped after {} steps with victims unreported", log.steps);
    }
    let undelivered = log.undelivered();
    if undelivered > 0 {
        return Err(CliError::Runtime(format!(
            "{undelivered} of {} reports were not delivered; see {}",
            log.entries.len(),
            output.display()
        )));
    }
    Ok(log)
}
