//! Binary CART trees.
//!
//! One growing routine serves classification (Gini impurity, leaves hold a
//! class distribution) and regression (squared error, leaves hold one value
//! computed by a caller-supplied rule). Samples go left when
//! `x[feature] <= threshold`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set, Columns, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// Flat node list; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the leaf `x` falls into.
    pub fn leaf_index(&self, x: &FeatureVector) -> usize {
        self.leaf_index_by(|f| x.get(f))
    }

    fn leaf_index_by(&self, value: impl Fn(usize) -> f64) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if value(*feature) <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn leaf_value(&self, x: &FeatureVector) -> &[f64] {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 20,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Splitter {
    /// Every midpoint between consecutive distinct values.
    Best,
    /// One uniform threshold in `[min, max)` per candidate feature.
    Random,
}

pub(crate) struct GrowParams {
    pub tree: TreeParams,
    /// Non-constant features to examine per node; `None` examines all in index order.
    pub max_features: Option<usize>,
    pub splitter: Splitter,
}

/// Split objective. Costs are totals (not averages), so a split's cost is
/// `cost(left) + cost(right)`.
pub(crate) trait Criterion {
    type Acc: Clone;
    fn empty(&self) -> Self::Acc;
    fn push(&self, acc: &mut Self::Acc, sample: usize);
    fn pop(&self, acc: &mut Self::Acc, sample: usize);
    fn cost(&self, acc: &Self::Acc, n: usize) -> f64;
    fn leaf(&self, samples: &[usize]) -> Vec<f64>;
}

/// Gini impurity; `cost = n · gini = n − Σ count² / n`.
pub(crate) struct Gini<'a> {
    pub labels: &'a [usize],
}

impl Criterion for Gini<'_> {
    type Acc = [usize; N_CLASSES];

    fn empty(&self) -> Self::Acc {
        [0; N_CLASSES]
    }

    fn push(&self, acc: &mut Self::Acc, sample: usize) {
        acc[self.labels[sample]] += 1;
    }

    fn pop(&self, acc: &mut Self::Acc, sample: usize) {
        acc[self.labels[sample]] -= 1;
    }

    fn cost(&self, acc: &Self::Acc, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let sq: usize = acc.iter().map(|c| c * c).sum();
        n as f64 - sq as f64 / n as f64
    }

    fn leaf(&self, samples: &[usize]) -> Vec<f64> {
        let mut acc = self.empty();
        for &s in samples {
            self.push(&mut acc, s);
        }
        let n = samples.len().max(1) as f64;
        acc.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Squared error around the mean; the leaf value comes from `leaf_rule`.
pub(crate) struct SquaredError<'a, F> {
    pub targets: &'a [f64],
    pub leaf_rule: F,
}

impl<F: Fn(&[usize]) -> f64> Criterion for SquaredError<'_, F> {
    type Acc = (f64, f64);

    fn empty(&self) -> Self::Acc {
        (0.0, 0.0)
    }

    fn push(&self, acc: &mut Self::Acc, sample: usize) {
        let t = self.targets[sample];
        acc.0 += t;
        acc.1 += t * t;
    }

    fn pop(&self, acc: &mut Self::Acc, sample: usize) {
        let t = self.targets[sample];
        acc.0 -= t;
        acc.1 -= t * t;
    }

    fn cost(&self, acc: &Self::Acc, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        (acc.1 - acc.0 * acc.0 / n as f64).max(0.0)
    }

    fn leaf(&self, samples: &[usize]) -> Vec<f64> {
        vec![(self.leaf_rule)(samples)]
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Lower cost wins; exact ties go to the smaller feature, then threshold,
    /// so the result does not depend on the order features were visited.
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                (self.cost, self.feature, self.threshold).partial_cmp(&(o.cost, o.feature, o.threshold))
                    == Some(std::cmp::Ordering::Less)
            }
        }
    }
}

struct Grower<'a, C: Criterion> {
    x: &'a Columns,
    criterion: C,
    params: &'a GrowParams,
    nodes: Vec<Node>,
}

impl<C: Criterion> Grower<'_, C> {
    fn grow(&mut self, samples: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new() });

        let mut total = self.criterion.empty();
        for &s in &samples {
            self.criterion.push(&mut total, s);
        }
        let parent_cost = self.criterion.cost(&total, samples.len());
        let splittable = parent_cost > 0.0
            && depth < self.params.tree.max_depth
            && samples.len() >= self.params.tree.min_samples_split.max(2);

        let best = if splittable {
            self.best_split(&samples, &total, rng)
        } else {
            None
        };
        match best {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: self.criterion.leaf(&samples),
                };
            }
            Some(c) => {
                let col = self.x.col(c.feature);
                let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&s| col[s] <= c.threshold);
                let left = self.grow(l, depth + 1, rng);
                let right = self.grow(r, depth + 1, rng);
                self.nodes[id] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn best_split(&self, samples: &[usize], total: &C::Acc, rng: &mut ChaCha8Rng) -> Option<Candidate> {
        let dim = self.x.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        let budget = match self.params.max_features {
            Some(m) => {
                order.shuffle(rng);
                m.min(dim)
            }
            None => dim,
        };
        let mut best = None;
        let mut visited = 0;
        for f in order {
            if visited >= budget {
                break;
            }
            let col = self.x.col(f);
            let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(col[s]), hi.max(col[s]))
            });
            if lo >= hi {
                continue;
            }
            visited += 1;
            let cand = match self.params.splitter {
                Splitter::Best => self.best_threshold(f, samples, total),
                Splitter::Random => {
                    let threshold = rng.gen_range(lo..hi);
                    Some(self.evaluate(f, threshold, samples))
                }
            };
            if let Some(c) = cand {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn evaluate(&self, feature: usize, threshold: f64, samples: &[usize]) -> Candidate {
        let col = self.x.col(feature);
        let mut left = self.criterion.empty();
        let mut right = self.criterion.empty();
        let mut nl = 0;
        for &s in samples {
            if col[s] <= threshold {
                self.criterion.push(&mut left, s);
                nl += 1;
            } else {
                self.criterion.push(&mut right, s);
            }
        }
        Candidate {
            cost: self.criterion.cost(&left, nl) + self.criterion.cost(&right, samples.len() - nl),
            feature,
            threshold,
        }
    }

    fn best_threshold(&self, feature: usize, samples: &[usize], total: &C::Acc) -> Option<Candidate> {
        let col = self.x.col(feature);
        let mut sorted = samples.to_vec();
        sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let n = sorted.len();
        let mut left = self.criterion.empty();
        let mut right = total.clone();
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            let s = sorted[i];
            self.criterion.push(&mut left, s);
            self.criterion.pop(&mut right, s);
            let (v, next) = (col[s], col[sorted[i + 1]]);
            if v == next {
                continue;
            }
            let mut threshold = v + (next - v) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            let cand = Candidate {
                cost: self.criterion.cost(&left, i + 1) + self.criterion.cost(&right, n - i - 1),
                feature,
                threshold,
            };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
        best
    }
}

pub(crate) fn grow<C: Criterion>(
    x: &Columns,
    criterion: C,
    samples: Vec<usize>,
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut g = Grower {
        x,
        criterion,
        params,
        nodes: Vec::new(),
    };
    g.grow(samples, 0, rng);
    Tree { nodes: g.nodes }
}

/// A single CART classification tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub dim: usize,
    pub tree: Tree,
}

impl DecisionTree {
    /// Majority class of the leaf, ties to the smaller class index.
    pub fn predict_one(&self, x: &FeatureVector) -> Polarity {
        Polarity::from_index(argmax(self.tree.leaf_value(x)))
    }
}

pub(crate) fn label_indices(y: &[Polarity]) -> Vec<usize> {
    y.iter().map(|l| l.index()).collect()
}

pub fn fit_decision_tree(x: &[FeatureVector], y: &[Polarity], hp: &TreeParams) -> Result<DecisionTree> {
    let dim = check_training_set(x, y)?;
    let cols = Columns::new(x, dim);
    let labels = label_indices(y);
    let params = GrowParams {
        tree: *hp,
        max_features: None,
        splitter: Splitter::Best,
    };
    // The best splitter never draws from the generator.
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let tree = grow(
        &cols,
        Gini { labels: &labels },
        (0..x.len()).collect(),
        &params,
        &mut rng,
    );
    Ok(DecisionTree { dim, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(v)
    }

    fn pol(v: i64) -> Polarity {
        Polarity::from_value(v).unwrap()
    }

    #[test]
    fn constant_labels_single_leaf() {
        let x = vec![fv(&[1.0]), fv(&[2.0]), fv(&[3.0])];
        let y = vec![pol(0); 3];
        let m = fit_decision_tree(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(m.tree.nodes.len(), 1);
        assert_eq!(m.predict_one(&fv(&[9.0])), Polarity::Neutral);
    }

    #[test]
    fn one_dimensional_threshold() {
        let x = vec![fv(&[0.0]), fv(&[1.0]), fv(&[0.0]), fv(&[1.0])];
        let y = vec![pol(-1), pol(1), pol(-1), pol(1)];
        let m = fit_decision_tree(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(m.tree.depth(), 1);
        match &m.tree.nodes[0] {
            Node::Split { threshold, feature, .. } => {
                assert_eq!(*threshold, 0.5);
                assert_eq!(*feature, 0);
            }
            n => panic!("expected split, got {n:?}"),
        }
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.predict_one(xi), *yi);
        }
    }

    #[test]
    fn identical_points_tie_to_first_class() {
        let x = vec![fv(&[1.0]), fv(&[1.0])];
        let y = vec![pol(1), pol(0)];
        let m = fit_decision_tree(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(m.tree.n_leaves(), 1);
        assert_eq!(m.predict_one(&x[0]), Polarity::Neutral);
        let y = vec![pol(1), pol(-1)];
        let m = fit_decision_tree(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(m.predict_one(&x[0]), Polarity::Negative);
    }

    #[test]
    fn depth_and_min_split_respected() {
        let x: Vec<_> = (0..16).map(|i| fv(&[i as f64])).collect();
        let y: Vec<_> = (0..16).map(|i| pol(i % 3 - 1)).collect();
        let hp = TreeParams {
            max_depth: 2,
            min_samples_split: 2,
        };
        assert!(fit_decision_tree(&x, &y, &hp).unwrap().tree.depth() <= 2);
        let hp = TreeParams {
            max_depth: 20,
            min_samples_split: 100,
        };
        assert_eq!(fit_decision_tree(&x, &y, &hp).unwrap().tree.n_leaves(), 1);
    }

    #[test]
    fn leaf_distributions_sum_to_one() {
        let x: Vec<_> = (0..30).map(|i| fv(&[(i % 7) as f64, (i % 5) as f64])).collect();
        let y: Vec<_> = (0..30).map(|i| pol(i % 3 - 1)).collect();
        let hp = TreeParams {
            max_depth: 3,
            min_samples_split: 2,
        };
        let m = fit_decision_tree(&x, &y, &hp).unwrap();
        for n in &m.tree.nodes {
            if let Node::Leaf { value } = n {
                assert!((value.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    fn gini(counts: &[usize; N_CLASSES]) -> f64 {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return 0.0;
        }
        1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
    }

    fn gini_of(y: &[usize]) -> f64 {
        let mut c = [0; N_CLASSES];
        for &l in y {
            c[l] += 1;
        }
        gini(&c)
    }

    /// Walks the tree with the training samples, checking that leaves
    /// partition them and that every split lowers weighted impurity.
    fn check_structure(tree: &Tree, x: &[FeatureVector], labels: &[usize]) {
        let mut per_node: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
        per_node[0] = (0..x.len()).collect();
        for i in 0..tree.nodes.len() {
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = &tree.nodes[i]
            {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    per_node[i].iter().partition(|&&s| x[s].get(*feature) <= *threshold);
                assert!(!l.is_empty() && !r.is_empty());
                let parent = gini_of(&per_node[i].iter().map(|&s| labels[s]).collect::<Vec<_>>());
                let n = per_node[i].len() as f64;
                let wl = gini_of(&l.iter().map(|&s| labels[s]).collect::<Vec<_>>()) * l.len() as f64 / n;
                let wr = gini_of(&r.iter().map(|&s| labels[s]).collect::<Vec<_>>()) * r.len() as f64 / n;
                assert!(wl + wr <= parent + 1e-12);
                per_node[*left] = l;
                per_node[*right] = r;
            }
        }
        let mut landed = vec![0; x.len()];
        for (i, node) in tree.nodes.iter().enumerate() {
            if matches!(node, Node::Leaf { .. }) {
                for &s in &per_node[i] {
                    landed[s] += 1;
                    assert_eq!(tree.leaf_index(&x[s]), i);
                }
            }
        }
        assert!(landed.iter().all(|&c| c == 1));
    }

    proptest! {
        #[test]
        fn structure_invariants(
            rows in prop::collection::vec((prop::collection::vec(0u8..4, 3), 0usize..3), 1..40)
        ) {
            let x: Vec<_> = rows.iter().map(|(v, _)| fv(&v.iter().map(|&a| a as f64).collect::<Vec<_>>())).collect();
            let y: Vec<_> = rows.iter().map(|(_, c)| Polarity::from_index(*c)).collect();
            let m = fit_decision_tree(&x, &y, &TreeParams::default()).unwrap();
            check_structure(&m.tree, &x, &label_indices(&y));
        }
    }
}
