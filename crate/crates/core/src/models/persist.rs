//! Versioned JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ensemble::{Ensemble, WeakLearner};
use super::inference::Classifier;
use super::mlp::{Dense, Mlp};
use super::tree::DecisionTree;
use crate::data::{Feature, NormalizationParams};
use crate::{Error, Result, Scalar};

pub const MLP_FORMAT: &str = "artemis-mlp/1";
pub const TREE_FORMAT: &str = "artemis-tree/1";
pub const ENSEMBLE_FORMAT: &str = "artemis-ensemble/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MlpDoc<T> {
    pub layer_sizes: Vec<usize>,
    /// One row-major `inputs × outputs` array per layer.
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
    pub features: Vec<Feature>,
    pub normalization: Option<NormalizationParams<T>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LearnerDoc<T> {
    pub pair: (usize, usize),
    pub network: MlpDoc<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EnsembleDoc<T> {
    pub features: Vec<Feature>,
    pub normalization: Option<NormalizationParams<T>>,
    pub learners: Vec<LearnerDoc<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", bound = "T: Scalar")]
pub enum ModelFile<T> {
    #[serde(rename = "artemis-mlp/1")]
    Mlp(MlpDoc<T>),
    #[serde(rename = "artemis-tree/1")]
    Tree(DecisionTree<T>),
    #[serde(rename = "artemis-ensemble/1")]
    Ensemble(EnsembleDoc<T>),
}

impl<T: Scalar> From<&Mlp<T>> for MlpDoc<T> {
    fn from(m: &Mlp<T>) -> Self {
        MlpDoc {
            layer_sizes: m.layer_sizes(),
            weights: m.layers.iter().map(|l| l.weights.clone()).collect(),
            biases: m.layers.iter().map(|l| l.biases.clone()).collect(),
            features: m.normalizer.as_ref().map(|p| p.features.clone()).unwrap_or_default(),
            normalization: m.normalizer.clone(),
            seed: m.seed,
        }
    }
}

impl<T: Scalar> TryFrom<MlpDoc<T>> for Mlp<T> {
    type Error = Error;

    fn try_from(doc: MlpDoc<T>) -> Result<Self> {
        let n = doc.layer_sizes.len().saturating_sub(1);
        if n == 0 || doc.weights.len() != n || doc.biases.len() != n {
            return Err(Error::InvalidConfig("layer_sizes, weights and biases disagree".into()));
        }
        let layers = doc
            .layer_sizes
            .windows(2)
            .zip(doc.weights.into_iter().zip(doc.biases))
            .map(|(w, (weights, biases))| Dense {
                inputs: w[0],
                outputs: w[1],
                weights,
                biases,
            })
            .collect();
        let mut m = Mlp::from_layers(layers)?;
        if let Some(p) = &doc.normalization {
            if p.dim() != m.input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: m.input_dim(),
                    actual: p.dim(),
                });
            }
        }
        m.normalizer = doc.normalization;
        m.seed = doc.seed;
        Ok(m)
    }
}

impl<T: Scalar> From<&Mlp<T>> for ModelFile<T> {
    fn from(m: &Mlp<T>) -> Self {
        ModelFile::Mlp(m.into())
    }
}

impl<T: Scalar> From<&DecisionTree<T>> for ModelFile<T> {
    fn from(t: &DecisionTree<T>) -> Self {
        ModelFile::Tree(t.clone())
    }
}

impl<T: Scalar> From<&Ensemble<T>> for ModelFile<T> {
    fn from(e: &Ensemble<T>) -> Self {
        ModelFile::Ensemble(EnsembleDoc {
            features: e.features.clone(),
            normalization: e.normalizer.clone(),
            learners: e
                .learners
                .iter()
                .map(|l| LearnerDoc {
                    pair: l.pair,
                    network: (&l.net).into(),
                })
                .collect(),
        })
    }
}

impl<T: Scalar> ModelFile<T> {
    pub fn format(&self) -> &'static str {
        match self {
            ModelFile::Mlp(_) => MLP_FORMAT,
            ModelFile::Tree(_) => TREE_FORMAT,
            ModelFile::Ensemble(_) => ENSEMBLE_FORMAT,
        }
    }

    pub fn into_mlp(self) -> Result<Mlp<T>> {
        match self {
            ModelFile::Mlp(doc) => doc.try_into(),
            other => Err(Error::UnsupportedFormat(format!("expected {MLP_FORMAT}, found {}", other.format()))),
        }
    }

    pub fn into_tree(self) -> Result<DecisionTree<T>> {
        match self {
            ModelFile::Tree(t) => Ok(t),
            other => Err(Error::UnsupportedFormat(format!("expected {TREE_FORMAT}, found {}", other.format()))),
        }
    }

    pub fn into_ensemble(self) -> Result<Ensemble<T>> {
        match self {
            ModelFile::Ensemble(doc) => Ok(Ensemble {
                features: doc.features,
                normalizer: doc.normalization,
                learners: doc
                    .learners
                    .into_iter()
                    .map(|l| {
                        Ok(WeakLearner {
                            pair: l.pair,
                            net: l.network.try_into()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            }),
            other => Err(Error::UnsupportedFormat(format!(
                "expected {ENSEMBLE_FORMAT}, found {}",
                other.format()
            ))),
        }
    }

    /// Whatever the format, a model ready to classify raw vitals.
    pub fn into_classifier(self) -> Result<Box<dyn Classifier + Send + Sync>> {
        Ok(match self {
            ModelFile::Mlp(_) => Box::new(self.into_mlp()?),
            ModelFile::Tree(_) => Box::new(self.into_tree()?),
            ModelFile::Ensemble(_) => Box::new(self.into_ensemble()?),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MLP_FORMAT | TREE_FORMAT | ENSEMBLE_FORMAT) => Ok(serde_json::from_value(value)?),
            Some(other) => Err(Error::UnsupportedFormat(other.to_owned())),
            None => Err(Error::UnsupportedFormat("<missing format field>".into())),
        }
    }
}

pub fn save_model<T: Scalar>(path: impl AsRef<Path>, model: &ModelFile<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<ModelFile<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text)
}
