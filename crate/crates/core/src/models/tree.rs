//! CART decision tree with Gini impurity.

use serde::{Deserialize, Serialize};

use crate::data::{Acuity, Feature};
use crate::{Error, Result, Scalar};

/// `1 − Σ pᵢ²` over the label multiset; 0 for an empty slice.
pub fn gini_impurity(labels: &[Acuity]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts = [0usize; Acuity::COUNT];
    for a in labels {
        counts[a.index()] += 1;
    }
    let n = labels.len() as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub min_samples: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Node<T> {
    /// Samples with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; Acuity::COUNT],
        prediction: Acuity,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecisionTree<T> {
    /// Names of the input columns, when fitted on vital signs.
    pub features: Vec<Feature>,
    pub n_inputs: usize,
    /// Arena; the root is `nodes[0]`.
    pub nodes: Vec<Node<T>>,
}

fn majority(counts: &[usize; Acuity::COUNT]) -> Acuity {
    let mut best = 0;
    for k in 1..Acuity::COUNT {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    Acuity::from_index(best).expect("class index")
}

fn leaf<T>(counts: [usize; Acuity::COUNT]) -> Node<T> {
    Node::Leaf {
        counts,
        prediction: majority(&counts),
    }
}

/// Candidate split scored by `Σ left_k²/n_l + Σ right_k²/n_r`; larger is purer.
#[derive(Clone, Copy)]
struct Score {
    left_sq: u128,
    right_sq: u128,
    n_left: u128,
    n_right: u128,
}

impl Score {
    fn beats(&self, other: &Score) -> bool {
        let lhs = (self.left_sq * self.n_right + self.right_sq * self.n_left) * (other.n_left * other.n_right);
        let rhs = (other.left_sq * other.n_right + other.right_sq * other.n_left) * (self.n_left * self.n_right);
        lhs > rhs
    }
}

struct Builder<'a, T> {
    xs: &'a [Vec<T>],
    ys: &'a [Acuity],
    config: &'a TreeConfig,
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Builder<'_, T> {
    fn counts(&self, idx: &[usize]) -> [usize; Acuity::COUNT] {
        let mut c = [0; Acuity::COUNT];
        for &i in idx {
            c[self.ys[i].index()] += 1;
        }
        c
    }

    /// Best `(feature, threshold)`; ties go to the lowest feature, then the lowest threshold.
    fn best_split(&self, idx: &mut [usize], counts: &[usize; Acuity::COUNT]) -> Option<(usize, T)> {
        let n = idx.len();
        let mut best: Option<(Score, usize, T)> = None;
        for f in 0..self.xs[0].len() {
            idx.sort_by(|&a, &b| self.xs[a][f].partial_cmp(&self.xs[b][f]).expect("finite features"));
            let mut left = [0u128; Acuity::COUNT];
            let mut right = counts.map(|c| c as u128);
            let mut left_sq = 0u128;
            let mut right_sq: u128 = right.iter().map(|c| c * c).sum();
            for pos in 0..n - 1 {
                let k = self.ys[idx[pos]].index();
                left_sq += 2 * left[k] + 1;
                right_sq -= 2 * right[k] - 1;
                left[k] += 1;
                right[k] -= 1;
                let (lo, hi) = (self.xs[idx[pos]][f], self.xs[idx[pos + 1]][f]);
                if !(lo < hi) {
                    continue;
                }
                let score = Score {
                    left_sq,
                    right_sq,
                    n_left: pos as u128 + 1,
                    n_right: (n - pos - 1) as u128,
                };
                if best.as_ref().is_none_or(|(s, _, _)| score.beats(s)) {
                    let mut threshold = lo + (hi - lo) / T::lit(2.0);
                    if !(threshold > lo) {
                        threshold = hi;
                    }
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(mut self, root: Vec<usize>) -> Vec<Node<T>> {
        self.nodes.push(placeholder());
        let mut work = vec![(0usize, root, 0usize)];
        while let Some((slot, mut idx, depth)) = work.pop() {
            let counts = self.counts(&idx);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || depth_capped || idx.len() < self.config.min_samples.max(2) {
                None
            } else {
                self.best_split(&mut idx, &counts)
            };
            let Some((feature, threshold)) = split else {
                self.nodes[slot] = leaf(counts);
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.xs[i][feature] < threshold);
            let (left, right) = (self.nodes.len(), self.nodes.len() + 1);
            self.nodes.push(placeholder());
            self.nodes.push(placeholder());
            self.nodes[slot] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            work.push((right, r, depth + 1));
            work.push((left, l, depth + 1));
        }
        self.nodes
    }
}

fn placeholder<T>() -> Node<T> {
    Node::Leaf {
        counts: [0; Acuity::COUNT],
        prediction: Acuity::NonUrgent,
    }
}

/// Greedy CART on a row-major feature matrix.
pub fn tree_fit<T: Scalar>(xs: &[Vec<T>], ys: &[Acuity], config: &TreeConfig) -> Result<DecisionTree<T>> {
    if xs.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let width = xs[0].len();
    if let Some(row) = xs.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: row.len(),
        });
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("tree features must be finite".into()));
    }
    let builder = Builder {
        xs,
        ys,
        config,
        nodes: Vec::new(),
    };
    Ok(DecisionTree {
        features: Vec::new(),
        n_inputs: width,
        nodes: builder.build((0..xs.len()).collect()),
    })
}

pub fn tree_predict<T: Scalar>(tree: &DecisionTree<T>, x: &[T]) -> Acuity {
    tree.predict(x)
}

impl<T: Scalar> DecisionTree<T> {
    pub fn with_features(mut self, features: &[Feature]) -> Self {
        self.features = features.to_vec();
        self
    }

    fn leaf_for(&self, x: &[T]) -> &Node<T> {
        let mut node = &self.nodes[0];
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if x[*feature] < *threshold {
                &self.nodes[*left]
            } else {
                &self.nodes[*right]
            };
        }
        node
    }

    pub fn predict(&self, x: &[T]) -> Acuity {
        match self.leaf_for(x) {
            Node::Leaf { prediction, .. } => *prediction,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Class frequencies of the leaf `x` lands in.
    pub fn leaf_distribution(&self, x: &[T]) -> [f64; Acuity::COUNT] {
        match self.leaf_for(x) {
            Node::Leaf { counts, .. } => {
                let total = counts.iter().sum::<usize>().max(1) as f64;
                counts.map(|c| c as f64 / total)
            }
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
