//! Ten weak learners, one per unordered pair of five features, combined by plurality vote.

use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, TriageLabel};
use super::train::{mlp_train, TrainConfig};
use crate::data::{Acuity, Feature, NormalizationParams};
use crate::seed;
use crate::{Error, Result, Scalar};

pub const ENSEMBLE_INPUTS: usize = 5;
pub const WEAK_HIDDEN: [usize; 2] = [16, 16];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WeakLearner<T> {
    /// Column indices into the 5-feature input.
    pub pair: (usize, usize),
    pub net: Mlp<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ensemble<T> {
    pub features: Vec<Feature>,
    pub normalizer: Option<NormalizationParams<T>>,
    pub learners: Vec<WeakLearner<T>>,
}

/// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn feature_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Trains one 2-input network per feature pair on normalized 5-column rows.
pub fn ensemble_fit<T: Scalar>(
    xs: &[Vec<T>],
    ys: &[Acuity],
    config: &TrainConfig,
    seed: u64,
) -> Result<Ensemble<T>> {
    let width = xs.first().map_or(0, Vec::len);
    if width != ENSEMBLE_INPUTS {
        return Err(Error::DimensionMismatch {
            expected: ENSEMBLE_INPUTS,
            actual: width,
        });
    }
    let learners = feature_pairs(ENSEMBLE_INPUTS)
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| {
            let k = k as u64;
            let projected: Vec<Vec<T>> = xs.iter().map(|x| vec![x[i], x[j]]).collect();
            let init = Mlp::init(2, &WEAK_HIDDEN, seed::derive(seed, k))?;
            let cfg = TrainConfig {
                seed: seed::derive(seed, 100 + k),
                ..config.clone()
            };
            let (net, _) = mlp_train(&init, &projected, ys, &cfg)?;
            Ok(WeakLearner { pair: (i, j), net })
        })
        .collect::<Result<_>>()?;
    Ok(Ensemble {
        features: Vec::new(),
        normalizer: None,
        learners,
    })
}

/// Plurality vote; ties go to the larger summed probability, then to the most severe class.
pub fn tally_votes<T: Scalar>(votes: &[TriageLabel<T>]) -> Acuity {
    let mut counts = [0usize; Acuity::COUNT];
    let mut mass = [T::zero(); Acuity::COUNT];
    for v in votes {
        counts[v.acuity.index()] += 1;
        for (m, &p) in mass.iter_mut().zip(&v.probabilities) {
            *m = *m + p;
        }
    }
    let mut best = 0;
    for k in 1..Acuity::COUNT {
        if counts[k] > counts[best] || (counts[k] == counts[best] && mass[k] > mass[best]) {
            best = k;
        }
    }
    Acuity::from_index(best).expect("class index")
}

pub fn ensemble_predict<T: Scalar>(model: &Ensemble<T>, x: &[T]) -> Result<Acuity> {
    Ok(tally_votes(&model.votes(x)?))
}

impl<T: Scalar> Ensemble<T> {
    pub fn with_normalizer(mut self, normalizer: NormalizationParams<T>) -> Self {
        self.features = normalizer.features.clone();
        self.normalizer = Some(normalizer);
        self
    }

    pub fn votes(&self, x: &[T]) -> Result<Vec<TriageLabel<T>>> {
        if x.len() != ENSEMBLE_INPUTS {
            return Err(Error::DimensionMismatch {
                expected: ENSEMBLE_INPUTS,
                actual: x.len(),
            });
        }
        self.learners
            .iter()
            .map(|l| l.net.forward(&[x[l.pair.0], x[l.pair.1]]))
            .collect()
    }

    /// Mean of the learners' class probabilities.
    pub fn mean_probabilities(&self, x: &[T]) -> Result<[f64; Acuity::COUNT]> {
        let votes = self.votes(x)?;
        let mut out = [0.0; Acuity::COUNT];
        for v in &votes {
            for (o, p) in out.iter_mut().zip(v.probabilities_f64()) {
                *o += p / votes.len() as f64;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vote(level: u8, probs: [f64; 5]) -> TriageLabel<f64> {
        TriageLabel {
            acuity: Acuity::from_level(level).unwrap(),
            probabilities: probs,
        }
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(
            feature_pairs(5),
            vec![(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
        );
    }

    #[test]
    fn unanimous_vote() {
        let votes = vec![vote(3, [0.0, 0.0, 1.0, 0.0, 0.0]); 10];
        assert_eq!(tally_votes(&votes), Acuity::Urgent);
    }

    #[test]
    fn even_split_with_equal_mass_goes_to_most_severe() {
        let mut votes = vec![vote(3, [0.0, 0.0, 0.6, 0.4, 0.0]); 5];
        votes.extend(vec![vote(4, [0.0, 0.0, 0.4, 0.6, 0.0]); 5]);
        assert_eq!(tally_votes(&votes), Acuity::Urgent);
    }

    #[test]
    fn even_split_prefers_larger_mass() {
        let mut votes = vec![vote(3, [0.0, 0.0, 0.5, 0.5, 0.0]); 5];
        votes.extend(vec![vote(4, [0.0, 0.0, 0.1, 0.9, 0.0]); 5]);
        assert_eq!(tally_votes(&votes), Acuity::LessUrgent);
    }

    #[test]
    fn plurality_tally() {
        let mut votes = vec![vote(1, [1.0, 0.0, 0.0, 0.0, 0.0]); 2];
        votes.extend(vec![vote(2, [0.0, 1.0, 0.0, 0.0, 0.0]); 3]);
        votes.extend(vec![vote(4, [0.0, 0.0, 0.0, 1.0, 0.0]); 5]);
        assert_eq!(tally_votes(&votes), Acuity::LessUrgent);
    }

    #[test]
    fn requires_five_features() {
        let xs = vec![vec![0.0; 4]; 3];
        let ys = vec![Acuity::Urgent; 3];
        assert!(matches!(
            ensemble_fit::<f64>(&xs, &ys, &TrainConfig::default(), 0),
            Err(Error::DimensionMismatch { expected: 5, actual: 4 })
        ));
    }

    #[test]
    fn fit_is_deterministic_with_ten_learners() {
        let xs: Vec<Vec<f64>> = (0..40)
            .map(|i| (0..5).map(|j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0).collect())
            .collect();
        let ys: Vec<Acuity> = (0..40).map(|i| Acuity::from_index(i % 5).unwrap()).collect();
        let cfg = TrainConfig { epochs: 2, batch_size: 8, ..Default::default() };
        let a = ensemble_fit(&xs, &ys, &cfg, 17).unwrap();
        assert_eq!(a, ensemble_fit(&xs, &ys, &cfg, 17).unwrap());
        assert_eq!(a.learners.len(), 10);
        let pairs: Vec<_> = a.learners.iter().map(|l| l.pair).collect();
        assert_eq!(pairs, feature_pairs(5));
        assert!(a.learners.iter().all(|l| l.net.layer_sizes() == vec![2, 16, 16, 5]));
    }
}
