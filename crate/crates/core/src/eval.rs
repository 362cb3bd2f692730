//! Stratified k-fold planning, per-class metrics and cross-validation
//! reports.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classic::N_CLASSES;
use crate::corpus::{Dataset, Polarity};
use crate::error::{Error, Result};
use crate::exec;
use crate::pipeline::PipelineConfig;

pub const DEFAULT_K: usize = 5;

/// Test-fold index lists; each list is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Indices outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Within each class (in class order) the member positions are shuffled and
/// dealt round-robin; the dealer position carries over between classes so
/// fold sizes stay balanced too.
pub fn stratified_kfold(labels: &[Polarity], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let mut by_class: [Vec<usize>; N_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::Stratification {
                class: Polarity::from_index(c).value(),
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut dealer = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            folds[dealer].push(i);
            dealer = (dealer + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan { folds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `confusion[gold][pred]`, classes ordered `-1, 0, +1`.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
    /// Indexed like the confusion matrix.
    pub per_class: [ClassMetrics; N_CLASSES],
    pub accuracy: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl Metrics {
    pub fn from_confusion(confusion: [[u64; N_CLASSES]; N_CLASSES]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..N_CLASSES).map(|c| confusion[c][c]).sum();
        let per_class = std::array::from_fn(|c| {
            let tp = confusion[c][c] as f64;
            let row: u64 = confusion[c].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[c]).sum();
            let precision = ratio(tp, col as f64);
            let recall = ratio(tp, row as f64);
            ClassMetrics {
                precision,
                recall,
                f1: ratio(2.0 * precision * recall, precision + recall),
            }
        });
        Metrics {
            confusion,
            per_class,
            accuracy: ratio(trace as f64, total as f64),
        }
    }

    pub fn class(&self, p: Polarity) -> ClassMetrics {
        self.per_class[p.index()]
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

pub fn compute_metrics(gold: &[Polarity], pred: &[Polarity]) -> Result<Metrics> {
    if gold.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            actual: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (g, p) in gold.iter().zip(pred) {
        confusion[g.index()][p.index()] += 1;
    }
    Ok(Metrics::from_confusion(confusion))
}

/// Fieldwise mean of per-fold metrics; the confusion matrix is summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub per_class: [ClassMetrics; N_CLASSES],
    pub accuracy: f64,
}

fn mean_metrics(folds: &[Metrics]) -> MeanMetrics {
    let n = folds.len().max(1) as f64;
    let mean = |f: &dyn Fn(&Metrics) -> f64| folds.iter().map(f).sum::<f64>() / n;
    MeanMetrics {
        per_class: std::array::from_fn(|c| ClassMetrics {
            precision: mean(&|m| m.per_class[c].precision),
            recall: mean(&|m| m.per_class[c].recall),
            f1: mean(&|m| m.per_class[c].f1),
        }),
        accuracy: mean(&|m| m.accuracy),
    }
}

/// Anything that can be fitted on one dataset and label another.
pub trait Learner: Sync {
    fn fit_predict(&self, train: &Dataset, test: &Dataset) -> Result<Vec<Polarity>>;
}

impl Learner for PipelineConfig {
    fn fit_predict(&self, train: &Dataset, test: &Dataset) -> Result<Vec<Polarity>> {
        self.fit(train)?.predict_dataset(test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalReport {
    pub classifier: String,
    pub dataset: String,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Metrics>,
    pub mean: MeanMetrics,
    /// One confusion matrix over every test prediction; the headline result.
    pub pooled: Metrics,
}

/// Fits on `k - 1` folds and predicts the held-out one, for every fold.
/// Folds may run concurrently; results are assembled in fold order.
pub fn run_crossval(
    dataset: &Dataset,
    learner: &dyn Learner,
    classifier: &str,
    k: usize,
    seed: u64,
) -> Result<CrossvalReport> {
    let labels = dataset.labels();
    let plan = stratified_kfold(&labels, k, seed)?;
    let results = exec::try_map_range(k, |f| {
        let test = dataset.subset(&plan.folds[f]);
        let train = dataset.subset(&plan.train_indices(f));
        let pred = learner.fit_predict(&train, &test).map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })?;
        if pred.len() != test.len() {
            return Err(Error::Fold {
                fold: f,
                source: Box::new(Error::DimensionMismatch {
                    expected: test.len(),
                    actual: pred.len(),
                }),
            });
        }
        let metrics = compute_metrics(&test.labels(), &pred)?;
        Ok((metrics, pred))
    })?;

    let mut pooled = [[0u64; N_CLASSES]; N_CLASSES];
    let mut folds = Vec::with_capacity(k);
    for (m, _) in results {
        for (row, add) in pooled.iter_mut().zip(&m.confusion) {
            row.iter_mut().zip(add).for_each(|(a, b)| *a += b);
        }
        folds.push(m);
    }
    Ok(CrossvalReport {
        classifier: classifier.to_owned(),
        dataset: dataset.name.clone(),
        k,
        seed,
        mean: mean_metrics(&folds),
        folds,
        pooled: Metrics::from_confusion(pooled),
    })
}

/// Report classes in table order.
pub const TABLE_CLASSES: [Polarity; N_CLASSES] = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];

pub const TABLE_HEADER: [&str; 12] = [
    "Classifier",
    "Dataset",
    "Positive P",
    "Positive R",
    "Positive F1",
    "Negative P",
    "Negative R",
    "Negative F1",
    "Neutral P",
    "Neutral R",
    "Neutral F1",
    "Accuracy",
];

fn table_row(classifier: &str, dataset: &str, per_class: &[ClassMetrics; N_CLASSES], accuracy: f64) -> Vec<String> {
    let mut row = vec![classifier.to_owned(), dataset.to_owned()];
    for p in TABLE_CLASSES {
        let m = per_class[p.index()];
        row.extend([m.precision, m.recall, m.f1].map(|v| format!("{v:.4}")));
    }
    row.push(format!("{accuracy:.4}"));
    row
}

/// Aligned plain-text table, one row per report (pooled metrics).
pub fn render_table(reports: &[CrossvalReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| table_row(&r.classifier, &r.dataset, &r.pooled.per_class, r.pooled.accuracy))
        .collect();
    render_rows(&rows)
}

fn render_rows(rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = TABLE_HEADER.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            // text columns left, numbers right
            if i < 2 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "{cell:>w$}");
            }
        }
        s.trim_end().to_owned()
    };
    let mut out = line(&mut TABLE_HEADER.iter().copied());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-|-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

impl CrossvalReport {
    /// Pooled table followed by the per-fold mean row.
    pub fn to_text(&self) -> String {
        let mut out = format!("Pooled over {} folds (seed {})\n", self.k, self.seed);
        out.push_str(&render_table(std::slice::from_ref(self)));
        out.push_str("\nMean over folds\n");
        out.push_str(&render_rows(&[table_row(
            &self.classifier,
            &self.dataset,
            &self.mean.per_class,
            self.mean.accuracy,
        )]));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
