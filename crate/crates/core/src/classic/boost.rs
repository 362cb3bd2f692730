//! First-order multiclass gradient boosting with CART regression trees.
//!
//! Scores start at zero. Each round fits one regression tree per class to
//! the softmax cross-entropy residual `onehot - softmax(scores)`; leaves hold
//! the one-step Newton estimate `Σr / Σ|r|(1-|r|)` clipped to `[-4, 4]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, Splitter, SquaredError, Tree, TreeParams};
use super::{argmax, check_training_set, require_two_classes, Columns, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::Result;
use crate::exec;

const LEAF_CLIP: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Recorded with the model; the fit itself draws no random numbers.
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoosting {
    pub dim: usize,
    pub learning_rate: f64,
    /// `rounds[r][c]` is the class-`c` tree of round `r`.
    pub rounds: Vec<[Tree; N_CLASSES]>,
}

pub(crate) fn softmax3(z: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - max).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

impl GradientBoosting {
    pub fn scores(&self, x: &FeatureVector) -> [f64; N_CLASSES] {
        self.staged_scores(x, self.rounds.len())
    }

    /// Scores after the first `rounds` rounds.
    pub fn staged_scores(&self, x: &FeatureVector, rounds: usize) -> [f64; N_CLASSES] {
        let mut s = [0.0; N_CLASSES];
        for trees in self.rounds.iter().take(rounds) {
            for (c, t) in trees.iter().enumerate() {
                s[c] += self.learning_rate * t.leaf_value(x)[0];
            }
        }
        s
    }

    pub fn predict_one(&self, x: &FeatureVector) -> Polarity {
        Polarity::from_index(argmax(&self.scores(x)))
    }

    /// Mean training cross-entropy after each round `0..=n_rounds`.
    pub fn staged_log_loss(&self, x: &[FeatureVector], y: &[Polarity]) -> Vec<f64> {
        let mut scores = vec![[0.0; N_CLASSES]; x.len()];
        let mean_loss = |scores: &[[f64; N_CLASSES]]| {
            scores
                .iter()
                .zip(y)
                .map(|(s, l)| -softmax3(s)[l.index()].ln())
                .sum::<f64>()
                / x.len() as f64
        };
        let mut out = vec![mean_loss(&scores)];
        for trees in &self.rounds {
            for (s, xi) in scores.iter_mut().zip(x) {
                for (c, t) in trees.iter().enumerate() {
                    s[c] += self.learning_rate * t.leaf_value(xi)[0];
                }
            }
            out.push(mean_loss(&scores));
        }
        out
    }
}

fn newton_leaf(residuals: &[f64], samples: &[usize]) -> f64 {
    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), &s| {
        let r = residuals[s];
        (n + r, d + r.abs() * (1.0 - r.abs()))
    });
    if den.abs() < 1e-150 {
        return 0.0;
    }
    (num / den).clamp(-LEAF_CLIP, LEAF_CLIP)
}

pub fn fit_gradient_boosting(x: &[FeatureVector], y: &[Polarity], hp: &BoostParams) -> Result<GradientBoosting> {
    let dim = check_training_set(x, y)?;
    require_two_classes(y)?;
    let cols = Columns::new(x, dim);
    let n = x.len();
    let params = GrowParams {
        tree: TreeParams {
            max_depth: hp.max_depth,
            min_samples_split: 2,
        },
        max_features: None,
        splitter: Splitter::Best,
    };
    let mut scores = vec![[0.0; N_CLASSES]; n];
    let mut rounds = Vec::with_capacity(hp.n_rounds);
    for _ in 0..hp.n_rounds {
        let probs: Vec<[f64; N_CLASSES]> = scores.iter().map(softmax3).collect();
        let trees = exec::map_range(N_CLASSES, |c| {
            let residuals: Vec<f64> = probs
                .iter()
                .zip(y)
                .map(|(p, l)| if l.index() == c { 1.0 } else { 0.0 } - p[c])
                .collect();
            let criterion = SquaredError {
                targets: &residuals,
                leaf_rule: |s: &[usize]| newton_leaf(&residuals, s),
            };
            // Best-split growth consumes no randomness.
            let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
            grow(&cols, criterion, (0..n).collect(), &params, &mut rng)
        });
        let trees: [Tree; N_CLASSES] = trees.try_into().expect("one tree per class");
        for (s, xi) in scores.iter_mut().zip(x) {
            for (c, t) in trees.iter().enumerate() {
                s[c] += hp.learning_rate * t.leaf_value(xi)[0];
            }
        }
        rounds.push(trees);
    }
    Ok(GradientBoosting {
        dim,
        learning_rate: hp.learning_rate,
        rounds,
    })
}
