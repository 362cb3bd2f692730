//! One-vs-rest linear SVM trained with the Pegasos stochastic subgradient
//! schedule (step `1/(λt)`).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set, require_two_classes, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::FeatureVector;
use crate::error::Result;
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 20,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    /// One weight vector per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: [f64; N_CLASSES],
}

impl LinearSvm {
    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn scores(&self, x: &FeatureVector) -> [f64; N_CLASSES] {
        std::array::from_fn(|c| x.dot(&self.weights[c]) + self.bias[c])
    }

    pub fn predict_one(&self, x: &FeatureVector) -> Polarity {
        Polarity::from_index(argmax(&self.scores(x)))
    }
}

/// Binary Pegasos on `targets ∈ {-1, +1}`. The bias is an extra weight on
/// a constant feature and is regularized with the rest.
///
/// The weight vector is stored as `scale · v` so the `(1 - ηλ)` shrink is O(1).
fn pegasos(x: &[FeatureVector], targets: &[f64], dim: usize, hp: &SvmParams, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![0.0; dim];
    let mut vb = 0.0;
    let mut scale = 1.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t = 0u64;
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (hp.lambda * t as f64);
            let margin = targets[i] * scale * (x[i].dot(&v) + vb);
            scale *= 1.0 - eta * hp.lambda;
            if scale <= 1e-12 {
                v.iter_mut().for_each(|w| *w = 0.0);
                vb = 0.0;
                scale = 1.0;
            }
            if margin < 1.0 {
                let step = eta * targets[i] / scale;
                for (j, val) in x[i].iter() {
                    v[j] += step * val;
                }
                vb += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                vb *= scale;
                scale = 1.0;
            }
        }
    }
    v.iter_mut().for_each(|w| *w *= scale);
    (v, vb * scale)
}

pub fn fit_svm(x: &[FeatureVector], y: &[Polarity], hp: &SvmParams) -> Result<LinearSvm> {
    let dim = check_training_set(x, y)?;
    require_two_classes(y)?;
    let heads = exec::map_range(N_CLASSES, |c| {
        let targets: Vec<f64> = y.iter().map(|l| if l.index() == c { 1.0 } else { -1.0 }).collect();
        pegasos(x, &targets, dim, hp, exec::sub_seed(hp.seed, c as u64))
    });
    let mut weights = Vec::with_capacity(N_CLASSES);
    let mut bias = [0.0; N_CLASSES];
    for (c, (w, b)) in heads.into_iter().enumerate() {
        weights.push(w);
        bias[c] = b;
    }
    Ok(LinearSvm { weights, bias })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(v)
    }

    fn accuracy(m: &LinearSvm, x: &[FeatureVector], y: &[Polarity]) -> f64 {
        x.iter().zip(y).filter(|(a, b)| m.predict_one(a) == **b).count() as f64 / x.len() as f64
    }

    #[test]
    fn two_separable_points() {
        let x = vec![fv(&[1.0, 0.0]), fv(&[0.0, 1.0])];
        let y = vec![Polarity::Positive, Polarity::Negative];
        let m = fit_svm(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn scaling_keeps_predictions() {
        let x = vec![
            fv(&[1.0, 0.0, 0.0]),
            fv(&[0.9, 0.1, 0.0]),
            fv(&[0.0, 1.0, 0.0]),
            fv(&[0.1, 0.8, 0.0]),
            fv(&[0.0, 0.0, 1.0]),
            fv(&[0.0, 0.2, 0.9]),
        ];
        let y = [1, 1, -1, -1, 0, 0].map(|v| Polarity::from_value(v).unwrap()).to_vec();
        let hp = SvmParams {
            epochs: 200,
            ..SvmParams::default()
        };
        let m = fit_svm(&x, &y, &hp).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        let scaled: Vec<_> = x
            .iter()
            .map(|v| fv(&v.to_dense().iter().map(|a| a * 3.0).collect::<Vec<_>>()))
            .collect();
        let m2 = fit_svm(&scaled, &y, &hp).unwrap();
        assert_eq!(accuracy(&m2, &scaled, &y), 1.0);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![fv(&[1.0]), fv(&[2.0])];
        assert!(fit_svm(&x, &[Polarity::Neutral; 2], &SvmParams::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let x = vec![fv(&[1.0, 0.5]), fv(&[0.0, 1.0]), fv(&[0.3, 0.3])];
        let y = vec![Polarity::Positive, Polarity::Negative, Polarity::Neutral];
        let hp = SvmParams::default();
        assert_eq!(fit_svm(&x, &y, &hp).unwrap(), fit_svm(&x, &y, &hp).unwrap());
    }
}
