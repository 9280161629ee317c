use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Scratch};
use crate::data::Acuity;
use crate::seed;
use crate::{Error, Result, Scalar};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 128,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate, batch size and epochs must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

struct Adam<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: i32,
}

impl<T: Scalar> Adam<T> {
    fn new(model: &Mlp<T>) -> Self {
        let shapes = model
            .layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.biases.len()])
            .map(|n| vec![T::zero(); n]);
        let m: Vec<Vec<T>> = shapes.collect();
        Adam {
            v: m.clone(),
            m,
            step: 0,
        }
    }

    fn update(&mut self, model: &mut Mlp<T>, grads: &super::Gradients<T>, lr: f64) {
        self.step += 1;
        let (b1, b2) = (T::lit(BETA1), T::lit(BETA2));
        let bias1 = T::one() - b1.powi(self.step);
        let bias2 = T::one() - b2.powi(self.step);
        let step_size = T::lit(lr) / bias1;
        let eps = T::lit(EPSILON);

        let params = model
            .layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.biases]);
        let gs = grads.weights.iter().zip(&grads.biases).flat_map(|(w, b)| [w, b]);
        for (((p, g), m), v) in params.zip(gs).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                let v_hat = v[i] / bias2;
                p[i] = p[i] - step_size * m[i] / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Mini-batch Adam on normalized features. Returns the trained model and the
/// mean training loss of each epoch (measured during the epoch).
pub fn mlp_train<T: Scalar>(
    model: &Mlp<T>,
    features: &[Vec<T>],
    labels: &[Acuity],
    config: &TrainConfig,
) -> Result<(Mlp<T>, Vec<T>)> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let dim = model.input_dim();
    if let Some(x) = features.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }

    let mut model = model.clone();
    model.seed = config.seed;
    let mut adam = Adam::new(&model);
    let mut grads = model.zero_gradients();
    let mut scratch = Scratch::default();
    let mut rng = seed::rng(config.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut batch_x = Vec::with_capacity(config.batch_size * dim);
    let mut batch_y = Vec::with_capacity(config.batch_size);
    let mut history = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = T::zero();
        for chunk in order.chunks(config.batch_size) {
            batch_x.clear();
            batch_y.clear();
            for &i in chunk {
                batch_x.extend_from_slice(&features[i]);
                batch_y.push(labels[i].index());
            }
            model.forward_batch(&batch_x, chunk.len(), &mut scratch);
            let loss = model.backward_batch(&batch_y, &mut scratch, &mut grads);
            epoch_loss = epoch_loss + loss * T::from_usize_lossy(chunk.len());
            adam.update(&mut model, &grads, config.learning_rate);
        }
        history.push(epoch_loss / T::from_usize_lossy(features.len()));
    }
    Ok((model, history))
}
