//! Manifest-driven runs: a JSON file names the seed, the input, the output
//! directory, the stages to execute and their parameters. Every run writes
//! `run.json` into the output directory with a sha256 digest per artifact.

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use artemis_sim::{MissionConfig, RetryPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::stages::{self, CompareParams, ModelKind, TrainParams};

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Preprocess,
    Synthesize,
    Analyze,
    Train,
    Evaluate,
    Compare,
    Simulate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Synthesize => "synthesize",
            Stage::Analyze => "analyze",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Compare => "compare",
            Stage::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessStage {
    pub delimiter: char,
}

impl Default for PreprocessStage {
    fn default() -> Self {
        PreprocessStage { delimiter: ',' }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeStage {
    /// Same width for every vital; per-vital defaults when absent.
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesizeStage {
    pub count: usize,
    /// Class weights for acuity 1..=5; the reference mix when absent.
    pub mix: Option<[f64; 5]>,
}

impl Default for SynthesizeStage {
    fn default() -> Self {
        SynthesizeStage { count: 60_000, mix: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainStage {
    pub models: Vec<ModelKind>,
    /// Fraction of the dataset used for training; the rest is the holdout.
    pub split: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Tree depth limit; unlimited when absent.
    pub max_depth: Option<usize>,
    pub rebalance: bool,
}

impl TrainStage {
    pub fn params(&self) -> TrainParams {
        TrainParams {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_depth: self.max_depth,
            rebalance: self.rebalance,
        }
    }
}

impl Default for TrainStage {
    fn default() -> Self {
        let p = TrainParams::default();
        TrainStage {
            models: vec![ModelKind::Mlp, ModelKind::Tree],
            split: 0.8,
            epochs: p.epochs,
            learning_rate: p.learning_rate,
            batch_size: p.batch_size,
            max_depth: p.max_depth,
            rebalance: p.rebalance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareStage {
    pub subsets: usize,
    pub fraction: f64,
}

impl Default for CompareStage {
    fn default() -> Self {
        CompareStage {
            subsets: 50,
            fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateStage {
    /// The built-in demo scenario when absent.
    pub scenario: Option<PathBuf>,
    pub server_url: Option<String>,
    pub step_dt: f64,
    pub max_steps: u64,
    pub retry: RetryPolicy,
}

impl Default for SimulateStage {
    fn default() -> Self {
        let c = MissionConfig::default();
        SimulateStage {
            scenario: None,
            server_url: None,
            step_dt: c.step_dt,
            max_steps: c.max_steps,
            retry: c.retry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub seed: u64,
    /// Raw table for `preprocess`, or the dataset itself when neither
    /// `preprocess` nor `synthesize` runs.
    #[serde(default)]
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub preprocess: PreprocessStage,
    #[serde(default)]
    pub analyze: AnalyzeStage,
    #[serde(default)]
    pub synthesize: SynthesizeStage,
    #[serde(default)]
    pub train: TrainStage,
    #[serde(default)]
    pub compare: CompareStage,
    #[serde(default)]
    pub simulate: SimulateStage,
}

impl RunManifest {
    /// Reads a manifest and resolves its relative paths against the
    /// manifest's own directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut manifest.output_dir);
        if let Some(p) = manifest.input.as_mut() {
            resolve(p);
        }
        if let Some(p) = manifest.simulate.scenario.as_mut() {
            resolve(p);
        }
        Ok(manifest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactStatus {
    Complete,
    /// Left behind by a failed stage and renamed with a `.partial` suffix.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub stage: Stage,
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
    pub status: ArtifactStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Failed,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub manifest: RunManifest,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<Artifact>,
}

pub const RUN_RECORD: &str = "run.json";

pub struct RunOutcome {
    pub record: RunRecord,
    /// The error that stopped the run, if any.
    pub error: Option<CliError>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut file = fs::File::open(path).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    let mut total = 0u64;
    loop {
        let n = file
            .read(&mut buf)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

fn model_file(kind: ModelKind) -> String {
    format!("model-{}.json", kind.as_str())
}

/// Artifact names a stage writes, relative to the output directory.
fn outputs(stage: Stage, manifest: &RunManifest) -> Vec<String> {
    let models = &manifest.train.models;
    match stage {
        Stage::Preprocess => vec!["clean.csv".into(), "preprocess.json".into()],
        Stage::Synthesize => vec!["synthetic.csv".into()],
        Stage::Analyze => vec!["analysis.json".into()],
        Stage::Train => {
            let mut names = vec!["holdout.csv".to_owned()];
            for &k in models {
                names.push(model_file(k));
                if k == ModelKind::Mlp {
                    names.push("history-mlp.json".into());
                }
            }
            names
        }
        Stage::Evaluate => models
            .iter()
            .flat_map(|k| [format!("metrics-{}.json", k.as_str()), format!("roc-{}.csv", k.as_str())])
            .collect(),
        Stage::Compare => vec!["comparison.json".into()],
        Stage::Simulate => vec!["mission.jsonl".into()],
    }
}

/// Runs the requested stages in pipeline order, writing `run.json` whether
/// or not a stage fails.
pub fn run_pipeline(manifest: &RunManifest) -> Result<RunOutcome> {
    let stages: BTreeSet<Stage> = manifest.stages.iter().copied().collect();
    if stages.is_empty() {
        return Err(CliError::Usage("manifest lists no stages".into()));
    }
    check(manifest, &stages)?;
    let dir = &manifest.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;

    let mut record = RunRecord {
        manifest: manifest.clone(),
        status: RunStatus::Complete,
        failed_stage: None,
        error: None,
        artifacts: Vec::new(),
    };
    let mut error = None;
    for &stage in &stages {
        log::info!("stage {}", stage.as_str());
        let names = outputs(stage, manifest);
        let result = run_stage(stage, manifest, &stages);
        let failed = result.is_err();
        for name in names {
            let path = dir.join(&name);
            if !path.exists() {
                continue;
            }
            let (name, path, status) = if failed {
                let partial = format!("{name}.partial");
                let target = dir.join(&partial);
                fs::rename(&path, &target).map_err(|e| CliError::write(&target, e))?;
                (partial, target, ArtifactStatus::Partial)
            } else {
                (name, path, ArtifactStatus::Complete)
            };
            let (sha256, bytes) = sha256_file(&path)?;
            record.artifacts.push(Artifact {
                stage,
                path: name,
                sha256,
                bytes,
                status,
            });
        }
        if let Err(e) = result {
            record.status = RunStatus::Failed;
            record.failed_stage = Some(stage);
            record.error = Some(e.to_string());
            error = Some(e);
            break;
        }
    }
    stages::write_json(&dir.join(RUN_RECORD), &record)?;
    Ok(RunOutcome { record, error })
}

fn check(manifest: &RunManifest, stages: &BTreeSet<Stage>) -> Result<()> {
    let produces_data = stages.contains(&Stage::Preprocess) || stages.contains(&Stage::Synthesize);
    if stages.contains(&Stage::Preprocess) && manifest.input.is_none() {
        return Err(CliError::Usage("stage preprocess needs `input`".into()));
    }
    if (stages.contains(&Stage::Analyze) || stages.contains(&Stage::Train)) && !produces_data && manifest.input.is_none() {
        return Err(CliError::Usage(
            "stages analyze and train need `input` or a preprocess/synthesize stage".into(),
        ));
    }
    let models = &manifest.train.models;
    if models.is_empty() && stages.iter().any(|s| matches!(s, Stage::Train | Stage::Evaluate | Stage::Compare | Stage::Simulate)) {
        return Err(CliError::Usage("train.models is empty".into()));
    }
    if stages.contains(&Stage::Compare) && models.len() < 2 {
        return Err(CliError::Usage("stage compare needs two entries in train.models".into()));
    }
    let unique: BTreeSet<&str> = models.iter().map(|m| m.as_str()).collect();
    if unique.len() != models.len() {
        return Err(CliError::Usage("train.models lists a model twice".into()));
    }
    if !manifest.preprocess.delimiter.is_ascii() {
        return Err(CliError::Usage("preprocess.delimiter must be an ASCII character".into()));
    }
    Ok(())
}

/// Dataset consumed by analyze and train: the cleaned table, else the
/// synthetic one, else the manifest input.
fn dataset(manifest: &RunManifest, stages: &BTreeSet<Stage>) -> PathBuf {
    let dir = &manifest.output_dir;
    if stages.contains(&Stage::Preprocess) {
        dir.join("clean.csv")
    } else if stages.contains(&Stage::Synthesize) {
        dir.join("synthetic.csv")
    } else {
        manifest.input.clone().expect("checked before the run")
    }
}

fn run_stage(stage: Stage, m: &RunManifest, stages: &BTreeSet<Stage>) -> Result<()> {
    let dir = &m.output_dir;
    let seed = m.seed;
    match stage {
        Stage::Preprocess => {
            let input = m.input.as_deref().expect("checked before the run");
            stages::preprocess_file(
                input,
                &dir.join("clean.csv"),
                Some(&dir.join("preprocess.json")),
                m.preprocess.delimiter as u8,
            )?;
        }
        Stage::Synthesize => {
            let mix = match m.synthesize.mix {
                Some(w) => {
                    let mix = artemis_core::data::ClassMix(w);
                    mix.validate().map_err(|e| CliError::Usage(format!("synthesize.mix: {e}")))?;
                    mix
                }
                None => artemis_core::data::ClassMix::reference(),
            };
            stages::synthesize_file(&dir.join("synthetic.csv"), m.synthesize.count, &mix, seed)?;
        }
        Stage::Analyze => {
            stages::analyze_file(&dataset(m, stages), &dir.join("analysis.json"), m.analyze.bin_width)?;
        }
        Stage::Train => {
            let params = m.train.params();
            let records = stages::load_dataset(&dataset(m, stages))?;
            let (train, holdout) = stages::split_dataset(&records, m.train.split, seed)?;
            stages::write_dataset(&dir.join("holdout.csv"), &holdout)?;
            for &kind in &m.train.models {
                let trained = stages::train_model(&train, kind, &params, seed)?;
                let history = (kind == ModelKind::Mlp).then(|| dir.join("history-mlp.json"));
                stages::save_trained(&trained, &dir.join(model_file(kind)), history.as_deref())?;
            }
        }
        Stage::Evaluate => {
            for &kind in &m.train.models {
                let report = stages::evaluate_file(
                    &dir.join(model_file(kind)),
                    &dir.join("holdout.csv"),
                    Some(&dir.join(format!("metrics-{}.json", kind.as_str()))),
                    Some(&dir.join(format!("roc-{}.csv", kind.as_str()))),
                )?;
                print!("{}", report.to_table());
            }
        }
        Stage::Compare => {
            let params = CompareParams {
                subsets: m.compare.subsets,
                fraction: m.compare.fraction,
            };
            let c = stages::compare_files(
                &dir.join(model_file(m.train.models[0])),
                &dir.join(model_file(m.train.models[1])),
                &dir.join("holdout.csv"),
                Some(&dir.join("comparison.json")),
                &params,
                seed,
            )?;
            println!(
                "{} vs {}: {} wins, {} losses, {} ties",
                c.model_a, c.model_b, c.report.wins_a, c.report.wins_b, c.report.ties
            );
        }
        Stage::Simulate => {
            let params = stages::SimulateParams {
                scenario: m.simulate.scenario.as_deref(),
                server_url: m.simulate.server_url.as_deref(),
                seed: None,
                config: MissionConfig {
                    step_dt: m.simulate.step_dt,
                    max_steps: m.simulate.max_steps,
                    retry: m.simulate.retry.clone(),
                },
            };
            stages::simulate_file(&dir.join(model_file(m.train.models[0])), &dir.join("mission.jsonl"), &params)?;
        }
    }
    Ok(())
}
