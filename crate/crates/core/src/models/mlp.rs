//! Dense feed-forward acuity network: ReLU hidden layers, softmax output,
//! mean cross-entropy loss with hand-written backpropagation.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Acuity, NormalizationParams};
use crate::seed;
use crate::{Error, Result, Scalar};

/// Default hidden widths of the seven-layer acuity network.
pub const DEFAULT_HIDDEN: [usize; 7] = [64, 64, 32, 32, 16, 16, 8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `inputs × outputs`.
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.outputs + j]
    }

    /// `out[b, :] = bias + x[b, :] · W` for every row of a flat batch.
    fn affine(&self, x: &[T], batch: usize, out: &mut Vec<T>) {
        out.clear();
        out.reserve(batch * self.outputs);
        for b in 0..batch {
            out.extend_from_slice(&self.biases);
            let row = &x[b * self.inputs..(b + 1) * self.inputs];
            let dst = &mut out[b * self.outputs..(b + 1) * self.outputs];
            for (i, &xi) in row.iter().enumerate() {
                if xi == T::zero() {
                    continue;
                }
                let w = &self.weights[i * self.outputs..(i + 1) * self.outputs];
                for (d, &wij) in dst.iter_mut().zip(w) {
                    *d = *d + xi * wij;
                }
            }
        }
    }
}

/// Model output: class probabilities and the arg-max acuity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TriageLabel<T> {
    pub acuity: Acuity,
    pub probabilities: [T; Acuity::COUNT],
}

impl<T: Scalar> TriageLabel<T> {
    /// Ties resolve to the most severe class.
    pub fn from_probabilities(probabilities: [T; Acuity::COUNT]) -> Self {
        let mut best = 0;
        for k in 1..Acuity::COUNT {
            if probabilities[k] > probabilities[best] {
                best = k;
            }
        }
        TriageLabel {
            acuity: Acuity::from_index(best).expect("class index"),
            probabilities,
        }
    }

    pub fn probabilities_f64(&self) -> [f64; Acuity::COUNT] {
        self.probabilities.map(Scalar::to_f64_lossy)
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mlp<T> {
    pub layers: Vec<Dense<T>>,
    /// Parameters used to standardize raw vitals before the forward pass.
    pub normalizer: Option<NormalizationParams<T>>,
    pub seed: u64,
}

/// Gradients with the same shapes as the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> Gradients<T> {
    fn zeros_like(model: &Mlp<T>) -> Self {
        Gradients {
            weights: model.layers.iter().map(|l| vec![T::zero(); l.weights.len()]).collect(),
            biases: model.layers.iter().map(|l| vec![T::zero(); l.biases.len()]).collect(),
        }
    }

    fn reset(&mut self) {
        for g in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            g.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    /// Flattened in [`Mlp::param`] order.
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// Per-layer activations for one batch; `acts[0]` is the input.
#[derive(Debug, Default)]
pub(crate) struct Scratch<T> {
    acts: Vec<Vec<T>>,
    delta: Vec<T>,
    delta_prev: Vec<T>,
}

/// Seven-hidden-layer network with Glorot-uniform weights and zero biases.
pub fn mlp_init<T: Scalar>(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Mlp<T>> {
    if hidden.len() != 7 {
        return Err(Error::InvalidConfig(format!(
            "expected 7 hidden layer widths, got {}",
            hidden.len()
        )));
    }
    Mlp::init(input_dim, hidden, seed)
}

impl<T: Scalar> Mlp<T> {
    /// Network of any depth ending in a 5-way classification layer.
    pub fn init(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(Acuity::COUNT);
        if sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("layer sizes must be >= 1: {sizes:?}")));
        }
        let mut rng = seed::rng(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = Dense::zeros(fan_in, fan_out);
                for x in &mut layer.weights {
                    *x = T::lit(rng.random_range(-limit..limit));
                }
                layer
            })
            .collect();
        Ok(Mlp {
            layers,
            normalizer: None,
            seed,
        })
    }

    /// Validates that consecutive layers chain and the output is 5-way.
    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        };
        if last.outputs != Acuity::COUNT {
            return Err(Error::DimensionMismatch {
                expected: Acuity::COUNT,
                actual: last.outputs,
            });
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::InvalidConfig("layer buffers do not match its shape".into()));
            }
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: w[0].outputs,
                    actual: w[1].inputs,
                });
            }
        }
        Ok(Mlp {
            layers,
            normalizer: None,
            seed: 0,
        })
    }

    pub fn with_normalizer(mut self, normalizer: NormalizationParams<T>) -> Self {
        self.normalizer = Some(normalizer);
        self
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    /// `[input, hidden..., 5]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn param_slot(&self, mut k: usize) -> (usize, bool, usize) {
        for (li, l) in self.layers.iter().enumerate() {
            if k < l.weights.len() {
                return (li, true, k);
            }
            k -= l.weights.len();
            if k < l.biases.len() {
                return (li, false, k);
            }
            k -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter `k` in layer order, weights before biases within a layer.
    pub fn param(&self, k: usize) -> T {
        let (l, is_weight, i) = self.param_slot(k);
        if is_weight {
            self.layers[l].weights[i]
        } else {
            self.layers[l].biases[i]
        }
    }

    pub fn set_param(&mut self, k: usize, value: T) {
        let (l, is_weight, i) = self.param_slot(k);
        if is_weight {
            self.layers[l].weights[i] = value;
        } else {
            self.layers[l].biases[i] = value;
        }
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn logits(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let mut scratch = Scratch::default();
        self.forward_batch(x, 1, &mut scratch);
        Ok(scratch.acts.pop().expect("output layer"))
    }

    /// Softmax class probabilities for one already-normalized feature vector.
    pub fn forward(&self, x: &[T]) -> Result<TriageLabel<T>> {
        let p = softmax(&self.logits(x)?);
        let mut probs = [T::zero(); Acuity::COUNT];
        probs.copy_from_slice(&p);
        Ok(TriageLabel::from_probabilities(probs))
    }

    pub(crate) fn forward_batch(&self, input: &[T], batch: usize, scratch: &mut Scratch<T>) {
        let n = self.layers.len();
        scratch.acts.resize_with(n + 1, Vec::new);
        scratch.acts[0].clear();
        scratch.acts[0].extend_from_slice(input);
        for (l, layer) in self.layers.iter().enumerate() {
            let (done, rest) = scratch.acts.split_at_mut(l + 1);
            let out = &mut rest[0];
            layer.affine(&done[l], batch, out);
            if l + 1 < n {
                out.iter_mut().for_each(|z| *z = z.max(T::zero()));
            }
        }
    }

    /// Backpropagates mean cross-entropy for the batch last run through
    /// [`Self::forward_batch`]. Overwrites `grads`; returns the mean loss.
    pub(crate) fn backward_batch(
        &self,
        labels: &[usize],
        scratch: &mut Scratch<T>,
        grads: &mut Gradients<T>,
    ) -> T {
        let batch = labels.len();
        let inv_batch = T::one() / T::from_usize_lossy(batch);
        let n = self.layers.len();
        let classes = Acuity::COUNT;
        grads.reset();

        let logits = &scratch.acts[n];
        scratch.delta.clear();
        let mut loss = T::zero();
        for (b, &y) in labels.iter().enumerate() {
            let z = &logits[b * classes..(b + 1) * classes];
            let max = z.iter().copied().fold(T::neg_infinity(), T::max);
            let sum: T = z.iter().map(|&v| (v - max).exp()).sum();
            let log_norm = max + sum.ln();
            loss = loss + (log_norm - z[y]);
            for (k, &v) in z.iter().enumerate() {
                let p = (v - log_norm).exp();
                let target = if k == y { T::one() } else { T::zero() };
                scratch.delta.push((p - target) * inv_batch);
            }
        }

        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let a_prev = &scratch.acts[l];
            let (gw, gb) = (&mut grads.weights[l], &mut grads.biases[l]);
            for b in 0..batch {
                let d = &scratch.delta[b * layer.outputs..(b + 1) * layer.outputs];
                for (g, &dj) in gb.iter_mut().zip(d) {
                    *g = *g + dj;
                }
                let a = &a_prev[b * layer.inputs..(b + 1) * layer.inputs];
                for (i, &ai) in a.iter().enumerate() {
                    if ai == T::zero() {
                        continue;
                    }
                    let row = &mut gw[i * layer.outputs..(i + 1) * layer.outputs];
                    for (g, &dj) in row.iter_mut().zip(d) {
                        *g = *g + ai * dj;
                    }
                }
            }
            if l == 0 {
                break;
            }
            // Hidden activations are ReLU outputs: derivative is 1 where positive.
            scratch.delta_prev.clear();
            for b in 0..batch {
                let d = &scratch.delta[b * layer.outputs..(b + 1) * layer.outputs];
                for i in 0..layer.inputs {
                    let v = if a_prev[b * layer.inputs + i] > T::zero() {
                        let w = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                        w.iter().zip(d).map(|(&wij, &dj)| wij * dj).sum()
                    } else {
                        T::zero()
                    };
                    scratch.delta_prev.push(v);
                }
            }
            std::mem::swap(&mut scratch.delta, &mut scratch.delta_prev);
        }
        loss * inv_batch
    }

    fn flatten_batch(&self, features: &[Vec<T>], labels: &[Acuity]) -> Result<(Vec<T>, Vec<usize>)> {
        if features.is_empty() {
            return Err(Error::Empty("batch"));
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        let mut flat = Vec::with_capacity(features.len() * self.input_dim());
        for x in features {
            self.check_dim(x)?;
            flat.extend_from_slice(x);
        }
        Ok((flat, labels.iter().map(|a| a.index()).collect()))
    }

    /// Mean cross-entropy `−ln p(true class)` and its gradient.
    pub fn loss_and_grad(&self, features: &[Vec<T>], labels: &[Acuity]) -> Result<(T, Gradients<T>)> {
        let (flat, ys) = self.flatten_batch(features, labels)?;
        let mut scratch = Scratch::default();
        let mut grads = Gradients::zeros_like(self);
        self.forward_batch(&flat, ys.len(), &mut scratch);
        let loss = self.backward_batch(&ys, &mut scratch, &mut grads);
        Ok((loss, grads))
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, features: &[Vec<T>], labels: &[Acuity]) -> Result<T> {
        let (flat, ys) = self.flatten_batch(features, labels)?;
        let mut scratch = Scratch::default();
        self.forward_batch(&flat, ys.len(), &mut scratch);
        let logits = &scratch.acts[self.layers.len()];
        let total: T = ys
            .iter()
            .enumerate()
            .map(|(b, &y)| {
                let z = &logits[b * Acuity::COUNT..(b + 1) * Acuity::COUNT];
                let max = z.iter().copied().fold(T::neg_infinity(), T::max);
                let sum: T = z.iter().map(|&v| (v - max).exp()).sum();
                max + sum.ln() - z[y]
            })
            .sum();
        Ok(total / T::from_usize_lossy(ys.len()))
    }

    pub(crate) fn zero_gradients(&self) -> Gradients<T> {
        Gradients::zeros_like(self)
    }
}
