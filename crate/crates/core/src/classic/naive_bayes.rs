//! Multinomial naive Bayes with additive smoothing.

use super::{argmax, check_training_set, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    /// `ln(class count / n)`; `-inf` for classes absent from training.
    pub log_prior: [f64; N_CLASSES],
    /// Row-major `N_CLASSES × dim` table of `ln P(feature | class)`.
    pub log_likelihood: Vec<f64>,
    dim: usize,
}

impl NaiveBayes {
    pub fn from_parts(log_prior: [f64; N_CLASSES], log_likelihood: Vec<f64>) -> Result<Self> {
        if !log_likelihood.len().is_multiple_of(N_CLASSES) {
            return Err(Error::invalid("likelihood table is not N_CLASSES rows"));
        }
        let dim = log_likelihood.len() / N_CLASSES;
        Ok(NaiveBayes {
            log_prior,
            log_likelihood,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_log_likelihood(&self, class: usize) -> &[f64] {
        &self.log_likelihood[class * self.dim..(class + 1) * self.dim]
    }

    /// Unnormalized `ln P(c) + Σ x_j ln P(j | c)` per class.
    pub fn joint_log_likelihood(&self, x: &FeatureVector) -> [f64; N_CLASSES] {
        let mut out = self.log_prior;
        for (c, o) in out.iter_mut().enumerate() {
            if o.is_finite() {
                let table = self.class_log_likelihood(c);
                *o += x.iter().map(|(j, v)| v * table[j]).sum::<f64>();
            }
        }
        out
    }

    /// Normalized log-posteriors `ln P(c | x)`.
    pub fn log_posterior(&self, x: &FeatureVector) -> [f64; N_CLASSES] {
        let joint = self.joint_log_likelihood(x);
        let max = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + joint.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        joint.map(|v| v - lse)
    }

    pub fn predict_one(&self, x: &FeatureVector) -> Polarity {
        Polarity::from_index(argmax(&self.joint_log_likelihood(x)))
    }
}

pub fn fit_naive_bayes(x: &[FeatureVector], y: &[Polarity], alpha: f64) -> Result<NaiveBayes> {
    let dim = check_training_set(x, y)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("smoothing alpha {alpha} must be > 0")));
    }
    let mut feature_counts = vec![0.0; N_CLASSES * dim];
    let mut class_counts = [0usize; N_CLASSES];
    for (row, (v, label)) in x.iter().zip(y).enumerate() {
        let c = label.index();
        class_counts[c] += 1;
        for (j, val) in v.iter() {
            if val < 0.0 {
                return Err(Error::invalid(format!(
                    "negative feature value {val} at row {row}, column {j}; multinomial naive Bayes needs counts"
                )));
            }
            feature_counts[c * dim + j] += val;
        }
    }
    let n = x.len() as f64;
    let log_prior = class_counts.map(|k| (k as f64 / n).ln());
    let mut log_likelihood = vec![0.0; N_CLASSES * dim];
    for c in 0..N_CLASSES {
        let row = &feature_counts[c * dim..(c + 1) * dim];
        let denom = (row.iter().sum::<f64>() + alpha * dim as f64).ln();
        for (j, &count) in row.iter().enumerate() {
            log_likelihood[c * dim + j] = (count + alpha).ln() - denom;
        }
    }
    Ok(NaiveBayes {
        log_prior,
        log_likelihood,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(v)
    }

    // feature 0 = "good", feature 1 = "bad"
    fn toy() -> (Vec<FeatureVector>, Vec<Polarity>) {
        let x = vec![fv(&[1.0, 0.0]), fv(&[0.0, 1.0]), fv(&[2.0, 0.0]), fv(&[1.0, 1.0])];
        let y = vec![
            Polarity::Positive,
            Polarity::Negative,
            Polarity::Positive,
            Polarity::Negative,
        ];
        (x, y)
    }

    #[test]
    fn hand_enumerated_bayes() {
        let (x, y) = toy();
        let m = fit_naive_bayes(&x, &y, 1.0).unwrap();
        let pos = m.class_log_likelihood(2)[0].exp();
        let neg = m.class_log_likelihood(0)[0].exp();
        assert!((pos - 0.8).abs() < 1e-12);
        assert!((neg - 0.4).abs() < 1e-12);
        assert_eq!(m.predict_one(&fv(&[1.0, 0.0])), Polarity::Positive);
    }

    #[test]
    fn likelihood_rows_are_distributions() {
        let (x, y) = toy();
        let m = fit_naive_bayes(&x, &y, 0.5).unwrap();
        for c in 0..N_CLASSES {
            let s: f64 = m.class_log_likelihood(c).iter().map(|v| v.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_class_and_zero_vector() {
        let x = vec![fv(&[1.0, 2.0]); 3];
        let y = vec![Polarity::Neutral; 3];
        let m = fit_naive_bayes(&x, &y, 1.0).unwrap();
        assert_eq!(m.predict_one(&fv(&[5.0, 0.0])), Polarity::Neutral);

        let (x, mut y) = toy();
        y[0] = Polarity::Neutral;
        let m = fit_naive_bayes(&x, &y, 1.0).unwrap();
        // priors: neg 2/4, neutral 1/4, pos 1/4 → zero vector follows priors
        assert_eq!(m.predict_one(&fv(&[0.0, 0.0])), Polarity::Negative);
    }

    #[test]
    fn negative_values_rejected() {
        let x = vec![fv(&[-1.0])];
        assert!(fit_naive_bayes(&x, &[Polarity::Neutral], 1.0).is_err());
    }
}
