//! Random forests and extremely randomized trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, label_indices, Gini, GrowParams, Splitter, Tree, TreeParams};
use super::{argmax, check_training_set, Columns, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::Result;
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `⌈√D⌉`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    #[serde(flatten)]
    pub tree: TreeParams,
    pub seed: u64,
}

impl ForestParams {
    pub fn random_forest(seed: u64) -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            tree: TreeParams::default(),
            seed,
        }
    }

    pub fn extra_trees(seed: u64) -> Self {
        ForestParams {
            bootstrap: false,
            ..Self::random_forest(seed)
        }
    }

    fn resolved_max_features(&self, dim: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim.max(1))
    }
}

/// An ensemble of classification trees voting by majority.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub dim: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn predict_one(&self, x: &FeatureVector) -> Polarity {
        let mut votes = [0f64; N_CLASSES];
        for t in &self.trees {
            votes[argmax(t.leaf_value(x))] += 1.0;
        }
        Polarity::from_index(argmax(&votes))
    }
}

fn fit_forest(x: &[FeatureVector], y: &[Polarity], hp: &ForestParams, splitter: Splitter) -> Result<Forest> {
    let dim = check_training_set(x, y)?;
    let cols = Columns::new(x, dim);
    let labels = label_indices(y);
    let params = GrowParams {
        tree: hp.tree,
        max_features: Some(hp.resolved_max_features(dim)),
        splitter,
    };
    let n = x.len();
    let trees = exec::map_range(hp.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(exec::sub_seed(hp.seed, t as u64));
        let samples: Vec<usize> = if hp.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        grow(&cols, Gini { labels: &labels }, samples, &params, &mut rng)
    });
    Ok(Forest { dim, trees })
}

/// Bagged CART trees with random feature subsets at each split.
pub fn fit_random_forest(x: &[FeatureVector], y: &[Polarity], hp: &ForestParams) -> Result<Forest> {
    fit_forest(x, y, hp, Splitter::Best)
}

/// Trees whose candidate splits use one uniform random threshold per feature.
pub fn fit_extra_trees(x: &[FeatureVector], y: &[Polarity], hp: &ForestParams) -> Result<Forest> {
    fit_forest(x, y, hp, Splitter::Random)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::fit_decision_tree;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(v)
    }

    fn noisy(n: usize, dim: usize, seed: u64) -> (Vec<FeatureVector>, Vec<Polarity>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<_> = (0..n)
            .map(|_| fv(&(0..dim).map(|_| rng.gen_range(0..4) as f64).collect::<Vec<_>>()))
            .collect();
        let y = (0..n).map(|_| Polarity::from_index(rng.gen_range(0..3))).collect();
        (x, y)
    }

    #[test]
    fn single_tree_forest_is_the_decision_tree() {
        let (x, y) = noisy(60, 5, 1);
        let hp = ForestParams {
            n_trees: 1,
            max_features: Some(5),
            bootstrap: false,
            tree: TreeParams::default(),
            seed: 9,
        };
        let forest = fit_random_forest(&x, &y, &hp).unwrap();
        let tree = fit_decision_tree(&x, &y, &hp.tree).unwrap();
        assert_eq!(forest.trees[0], tree.tree);
    }

    #[test]
    fn constant_labels() {
        let (x, _) = noisy(20, 3, 2);
        let y = vec![Polarity::Positive; 20];
        for f in [fit_random_forest, fit_extra_trees] {
            let m = f(&x, &y, &ForestParams::random_forest(3)).unwrap();
            assert!(m.trees.iter().all(|t| t.nodes.len() == 1));
            assert_eq!(m.predict_one(&x[0]), Polarity::Positive);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = noisy(50, 4, 3);
        let mut hp = ForestParams::random_forest(11);
        hp.n_trees = 10;
        assert_eq!(
            fit_random_forest(&x, &y, &hp).unwrap(),
            fit_random_forest(&x, &y, &hp).unwrap()
        );
        assert_eq!(
            fit_extra_trees(&x, &y, &hp).unwrap(),
            fit_extra_trees(&x, &y, &hp).unwrap()
        );
        hp.seed = 12;
        let other = fit_random_forest(&x, &y, &hp).unwrap();
        hp.seed = 11;
        assert_ne!(fit_random_forest(&x, &y, &hp).unwrap(), other);
    }

    #[test]
    fn extra_trees_separate_1d() {
        let x: Vec<_> = (0..20).map(|i| fv(&[i as f64])).collect();
        let y: Vec<_> = (0..20)
            .map(|i| if i < 10 { Polarity::Negative } else { Polarity::Positive })
            .collect();
        let m = fit_extra_trees(&x, &y, &ForestParams::extra_trees(5)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.predict_one(xi), *yi);
        }
    }
}
