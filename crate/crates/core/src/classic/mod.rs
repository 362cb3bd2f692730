//! Classical classifiers over sparse [`FeatureVector`]s.
//!
//! All models share one label ordering: class index 0, 1, 2 ↔ polarity
//! -1, 0, +1. Every argmax breaks ties toward the smaller class index.

mod boost;
mod forest;
mod naive_bayes;
mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use self::boost::{fit_gradient_boosting, BoostParams, GradientBoosting};
pub use self::forest::{fit_extra_trees, fit_random_forest, Forest, ForestParams};
pub use self::naive_bayes::{fit_naive_bayes, NaiveBayes};
pub use self::svm::{fit_svm, LinearSvm, SvmParams};
pub use self::tree::{fit_decision_tree, DecisionTree, Tree, TreeParams};

use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::{Error, Result};

pub const N_CLASSES: usize = 3;

/// Index of the maximum, first one on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Checks `|X| == |y| >= 1` and a common dimensionality; returns it.
pub(crate) fn check_training_set(x: &[FeatureVector], y: &[Polarity]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            x.len(),
            y.len()
        )));
    }
    let first = x.first().ok_or_else(|| Error::invalid("training set is empty"))?;
    let dim = first.dim();
    if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.dim(),
        });
    }
    Ok(dim)
}

pub(crate) fn require_two_classes(y: &[Polarity]) -> Result<()> {
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::invalid(
            "training labels contain a single class; need at least two",
        ));
    }
    Ok(())
}

/// Column-major dense copy of a sparse design matrix.
#[derive(Debug, Clone)]
pub(crate) struct Columns {
    cols: Vec<Vec<f64>>,
}

impl Columns {
    pub(crate) fn new(x: &[FeatureVector], dim: usize) -> Self {
        let mut cols = vec![vec![0.0; x.len()]; dim];
        for (row, v) in x.iter().enumerate() {
            for (j, val) in v.iter() {
                cols[j][row] = val;
            }
        }
        Columns { cols }
    }

    pub(crate) fn dim(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn col(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }
}

/// Predicts the most frequent training class regardless of input.
#[derive(Debug, Clone, PartialEq)]
pub struct Majority {
    pub dim: usize,
    pub class: Polarity,
}

pub fn fit_majority(x: &[FeatureVector], y: &[Polarity]) -> Result<Majority> {
    let dim = check_training_set(x, y)?;
    let mut counts = [0f64; N_CLASSES];
    for l in y {
        counts[l.index()] += 1.0;
    }
    Ok(Majority {
        dim,
        class: Polarity::from_index(argmax(&counts)),
    })
}

/// Per-kind training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    Majority,
    NaiveBayes { alpha: f64 },
    DecisionTree(TreeParams),
    Svm(SvmParams),
    RandomForest(ForestParams),
    ExtraTrees(ForestParams),
    GradientBoosting(BoostParams),
}

impl Hyperparams {
    pub fn naive_bayes() -> Self {
        Hyperparams::NaiveBayes { alpha: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::invalid(format!("{name} must be at least 1")))
            } else {
                Ok(())
            }
        };
        match self {
            Hyperparams::Majority => Ok(()),
            Hyperparams::NaiveBayes { alpha } => {
                if *alpha > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("smoothing alpha {alpha} must be > 0")))
                }
            }
            Hyperparams::DecisionTree(p) => {
                positive("max_depth", p.max_depth)?;
                positive("min_samples_split", p.min_samples_split)
            }
            Hyperparams::Svm(p) => {
                positive("epochs", p.epochs)?;
                if p.lambda > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("lambda {} must be > 0", p.lambda)))
                }
            }
            Hyperparams::RandomForest(p) | Hyperparams::ExtraTrees(p) => {
                positive("n_trees", p.n_trees)?;
                positive("max_depth", p.tree.max_depth)?;
                positive("min_samples_split", p.tree.min_samples_split)?;
                if let Some(m) = p.max_features {
                    positive("max_features", m)?;
                }
                Ok(())
            }
            Hyperparams::GradientBoosting(p) => {
                positive("max_depth", p.max_depth)?;
                if p.learning_rate > 0.0 && p.learning_rate <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "learning rate {} outside (0, 1]",
                        p.learning_rate
                    )))
                }
            }
        }
    }

    pub fn fit(&self, x: &[FeatureVector], y: &[Polarity]) -> Result<ClassicModel> {
        self.validate()?;
        Ok(match self {
            Hyperparams::Majority => ClassicModel::Majority(fit_majority(x, y)?),
            Hyperparams::NaiveBayes { alpha } => ClassicModel::NaiveBayes(fit_naive_bayes(x, y, *alpha)?),
            Hyperparams::DecisionTree(p) => ClassicModel::DecisionTree(fit_decision_tree(x, y, p)?),
            Hyperparams::Svm(p) => ClassicModel::Svm(fit_svm(x, y, p)?),
            Hyperparams::RandomForest(p) => ClassicModel::RandomForest(fit_random_forest(x, y, p)?),
            Hyperparams::ExtraTrees(p) => ClassicModel::ExtraTrees(fit_extra_trees(x, y, p)?),
            Hyperparams::GradientBoosting(p) => ClassicModel::GradientBoosting(fit_gradient_boosting(x, y, p)?),
        })
    }
}

/// A fitted classical model.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicModel {
    Majority(Majority),
    NaiveBayes(NaiveBayes),
    DecisionTree(DecisionTree),
    Svm(LinearSvm),
    RandomForest(Forest),
    ExtraTrees(Forest),
    GradientBoosting(GradientBoosting),
}

impl ClassicModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ClassicModel::Majority(_) => "majority",
            ClassicModel::NaiveBayes(_) => "nb",
            ClassicModel::DecisionTree(_) => "dtree",
            ClassicModel::Svm(_) => "svm",
            ClassicModel::RandomForest(_) => "rf",
            ClassicModel::ExtraTrees(_) => "etc",
            ClassicModel::GradientBoosting(_) => "gbt",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassicModel::Majority(m) => m.dim,
            ClassicModel::NaiveBayes(m) => m.dim(),
            ClassicModel::DecisionTree(m) => m.dim,
            ClassicModel::Svm(m) => m.dim(),
            ClassicModel::RandomForest(m) | ClassicModel::ExtraTrees(m) => m.dim,
            ClassicModel::GradientBoosting(m) => m.dim,
        }
    }

    /// Predicts one vector; the caller guarantees the dimensionality.
    fn predict_unchecked(&self, x: &FeatureVector) -> Polarity {
        match self {
            ClassicModel::Majority(m) => m.class,
            ClassicModel::NaiveBayes(m) => m.predict_one(x),
            ClassicModel::DecisionTree(m) => m.predict_one(x),
            ClassicModel::Svm(m) => m.predict_one(x),
            ClassicModel::RandomForest(m) | ClassicModel::ExtraTrees(m) => m.predict_one(x),
            ClassicModel::GradientBoosting(m) => m.predict_one(x),
        }
    }

    pub fn predict_one(&self, x: &FeatureVector) -> Result<Polarity> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub fn predict(&self, x: &[FeatureVector]) -> Result<Vec<Polarity>> {
        x.iter().map(|v| self.predict_one(v)).collect()
    }
}
