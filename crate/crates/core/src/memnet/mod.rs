//! Deep memory network: multi-hop content and location attention over the
//! context words of a sentence, queried by the aspect.

mod embeddings;
mod model;

pub use embeddings::{load_embeddings, EmbeddingSource, EmbeddingTable, OOV_RANGE};
pub use model::{
    forward, grad_check, location_weights, loss_and_gradients, predict_memnet, random_gradcheck_case, Gradients,
    MemNetInput, MemNetParams, Trace,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Polarity;
use crate::error::{Error, Result};

/// Half-width of the uniform initialization of the network weights.
pub const INIT_RANGE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub hops: usize,
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub trainable_embeddings: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            hops: 3,
            dim: 50,
            learning_rate: 0.01,
            epochs: 100,
            l2: 0.0,
            seed: 42,
            trainable_embeddings: false,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 {
            return Err(Error::invalid("hops must be at least 1"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::invalid(format!("l2 must be non-negative, got {}", self.l2)));
        }
        Ok(())
    }
}

/// Per-instance SGD with the visiting order reshuffled every epoch.
///
/// Returns the fitted parameters and the mean loss of each epoch.
pub fn train(
    examples: &[(MemNetInput, Polarity)],
    embeddings: EmbeddingTable,
    hp: &TrainParams,
) -> Result<(MemNetParams, Vec<f64>)> {
    hp.validate()?;
    if examples.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if embeddings.dim() != hp.dim {
        return Err(Error::DimensionMismatch {
            expected: hp.dim,
            actual: embeddings.dim(),
        });
    }
    for (input, _) in examples {
        input.validate(&embeddings)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut params = MemNetParams::uniform(embeddings, hp.hops, INIT_RANGE, hp.seed);
    params.trainable_embeddings = hp.trainable_embeddings;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(hp.epochs);
    let lr = hp.learning_rate;

    for epoch in 0..hp.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (input, gold) = &examples[i];
            let (loss, grads) = loss_and_gradients(&params, input, *gold);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    instance: i,
                    loss,
                });
            }
            total += loss;
            let mut g = grads.weights();
            params.for_each_weight_mut(|w| {
                let gw = g.next().expect("gradient per weight");
                *w -= lr * (gw + hp.l2 * *w);
            });
            for (id, row) in &grads.embeddings {
                for (e, ge) in params.embeddings.row_mut(*id).iter_mut().zip(row) {
                    *e -= lr * ge;
                }
            }
        }
        let mean = total / examples.len() as f64;
        log::debug!("memnet epoch {epoch}: mean loss {mean:.6}");
        history.push(mean);
    }
    Ok((params, history))
}
