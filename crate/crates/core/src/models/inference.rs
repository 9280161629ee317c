use super::ensemble::{tally_votes, Ensemble};
use super::mlp::{Mlp, TriageLabel};
use super::tree::DecisionTree;
use crate::data::{Acuity, VitalSigns};
use crate::{Error, Result, Scalar};

/// Vitals → label through the network's bound normalizer. Out-of-range
/// vitals are rejected as a sensor fault.
pub fn classify_vitals<T: Scalar>(model: &Mlp<T>, vitals: &VitalSigns) -> Result<TriageLabel<T>> {
    vitals.check_bounds()?;
    let params = model
        .normalizer
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("model has no normalization parameters".into()))?;
    model.forward(&params.transform_vitals(vitals))
}

/// Anything that maps raw vital signs to an acuity.
pub trait Classifier {
    /// Per-class scores in `[0, 1]`, used for ROC analysis.
    fn scores(&self, vitals: &VitalSigns) -> Result<[f64; Acuity::COUNT]>;

    fn predict(&self, vitals: &VitalSigns) -> Result<Acuity> {
        let s = self.scores(vitals)?;
        let mut best = 0;
        for k in 1..Acuity::COUNT {
            if s[k] > s[best] {
                best = k;
            }
        }
        Ok(Acuity::from_index(best).expect("class index"))
    }
}

impl<T: Scalar> Classifier for Mlp<T> {
    fn scores(&self, vitals: &VitalSigns) -> Result<[f64; Acuity::COUNT]> {
        Ok(classify_vitals(self, vitals)?.probabilities_f64())
    }

    fn predict(&self, vitals: &VitalSigns) -> Result<Acuity> {
        Ok(classify_vitals(self, vitals)?.acuity)
    }
}

impl<T: Scalar> Classifier for DecisionTree<T> {
    fn scores(&self, vitals: &VitalSigns) -> Result<[f64; Acuity::COUNT]> {
        Ok(self.leaf_distribution(&self.inputs(vitals)?))
    }

    fn predict(&self, vitals: &VitalSigns) -> Result<Acuity> {
        Ok(DecisionTree::predict(self, &self.inputs(vitals)?))
    }
}

impl<T: Scalar> DecisionTree<T> {
    fn inputs(&self, vitals: &VitalSigns) -> Result<Vec<T>> {
        if self.features.len() != self.n_inputs {
            return Err(Error::InvalidConfig("tree is not bound to named features".into()));
        }
        Ok(self.features.iter().map(|&f| T::lit(vitals.get(f))).collect())
    }
}

impl<T: Scalar> Classifier for Ensemble<T> {
    fn scores(&self, vitals: &VitalSigns) -> Result<[f64; Acuity::COUNT]> {
        self.mean_probabilities(&self.inputs(vitals)?)
    }

    fn predict(&self, vitals: &VitalSigns) -> Result<Acuity> {
        Ok(tally_votes(&self.votes(&self.inputs(vitals)?)?))
    }
}

impl<T: Scalar> Ensemble<T> {
    fn inputs(&self, vitals: &VitalSigns) -> Result<Vec<T>> {
        let params = self
            .normalizer
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("ensemble has no normalization parameters".into()))?;
        Ok(params.transform_vitals(vitals))
    }
}
