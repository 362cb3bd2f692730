//! Forward pass, backpropagation and finite-difference gradient check.
//!
//! With context embeddings `e_i`, location weights `v_i = 1 - l_i/n` and
//! memories `m_i = v_i e_i`, the aspect vector `x_0` is the mean aspect
//! embedding and every hop `k` computes
//!
//! ```text
//! g_i = tanh(w_att · [m_i ; x_{k-1}] + b_att)
//! α   = softmax(g)
//! x_k = Σ α_i m_i + W_lin x_{k-1} + b_lin
//! ```
//!
//! with the same `(w_att, b_att, W_lin, b_lin)` at every hop. The output is
//! `softmax(W_s x_K + b_s)` over the classes `(-1, 0, +1)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::embeddings::EmbeddingTable;
use crate::classic::{argmax, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::location_encode;
use crate::error::{Error, Result};
use crate::textproc::{TokenizedInstance, Vocabulary};

/// All trainable tensors plus the embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct MemNetParams {
    pub hops: usize,
    /// `1 × 2d`: first `d` entries score the memory, last `d` the hop state.
    pub w_att: Vec<f64>,
    pub b_att: f64,
    /// `d × d`, row-major.
    pub w_lin: Vec<f64>,
    pub b_lin: Vec<f64>,
    /// `3 × d`, row-major.
    pub w_s: Vec<f64>,
    pub b_s: [f64; N_CLASSES],
    pub embeddings: EmbeddingTable,
    pub trainable_embeddings: bool,
}

impl MemNetParams {
    pub fn zeros(embeddings: EmbeddingTable, hops: usize) -> Self {
        let d = embeddings.dim();
        MemNetParams {
            hops,
            w_att: vec![0.0; 2 * d],
            b_att: 0.0,
            w_lin: vec![0.0; d * d],
            b_lin: vec![0.0; d],
            w_s: vec![0.0; N_CLASSES * d],
            b_s: [0.0; N_CLASSES],
            embeddings,
            trainable_embeddings: false,
        }
    }

    /// Weights drawn uniformly from `[-scale, scale]` in declaration order.
    pub fn uniform(embeddings: EmbeddingTable, hops: usize, scale: f64, seed: u64) -> Self {
        let mut p = Self::zeros(embeddings, hops);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        p.for_each_weight_mut(|w| *w = rng.gen_range(-scale..=scale));
        p
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    /// Visits every non-embedding scalar in a fixed order:
    /// `w_att, b_att, w_lin, b_lin, w_s, b_s`.
    pub fn for_each_weight_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        self.w_att.iter_mut().for_each(&mut f);
        f(&mut self.b_att);
        self.w_lin.iter_mut().for_each(&mut f);
        self.b_lin.iter_mut().for_each(&mut f);
        self.w_s.iter_mut().for_each(&mut f);
        self.b_s.iter_mut().for_each(&mut f);
    }

    pub fn n_weights(&self) -> usize {
        let d = self.dim();
        2 * d + 1 + d * d + d + N_CLASSES * d + N_CLASSES
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let shapes_ok = self.hops >= 1
            && self.w_att.len() == 2 * d
            && self.w_lin.len() == d * d
            && self.b_lin.len() == d
            && self.w_s.len() == N_CLASSES * d;
        if !shapes_ok {
            return Err(Error::invalid("memory network parameter shapes are inconsistent"));
        }
        let mut finite = true;
        self.clone().for_each_weight_mut(|w| finite &= w.is_finite());
        if !finite {
            return Err(Error::invalid("memory network parameters are not finite"));
        }
        Ok(())
    }
}

/// One sentence/aspect query in id form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemNetInput {
    /// Context token ids in sentence order, aspect excluded. Id 0 marks
    /// padding or unknown words and never enters attention.
    pub context: Vec<u32>,
    /// Location value of each context entry (same length as `context`).
    pub locations: Vec<u32>,
    pub aspect: Vec<u32>,
    /// Index of the aspect in the collapsed sentence.
    pub aspect_position: usize,
    /// Collapsed sentence length `n` used by the location weights.
    pub sentence_len: usize,
}

impl MemNetInput {
    pub fn from_tokenized(ti: &TokenizedInstance, vocab: &Vocabulary) -> Self {
        MemNetInput {
            context: ti.context_tokens().map(|t| vocab.id_or_pad(t)).collect(),
            locations: location_encode(ti),
            aspect: ti.aspect_tokens().iter().map(|t| vocab.id_or_pad(t)).collect(),
            aspect_position: ti.aspect_span.0,
            sentence_len: ti.collapsed_len(),
        }
    }

    pub fn validate(&self, table: &EmbeddingTable) -> Result<()> {
        let rows = table.rows() as u32;
        if self.context.len() != self.locations.len() {
            return Err(Error::invalid("context and location lengths differ"));
        }
        if self.aspect.is_empty() {
            return Err(Error::invalid("aspect has no tokens"));
        }
        if let Some(id) = self.context.iter().chain(&self.aspect).find(|&&id| id >= rows) {
            return Err(Error::invalid(format!(
                "token id {id} outside embedding table of {rows} rows"
            )));
        }
        location_weights(&self.locations, self.sentence_len).map(|_| ())
    }
}

/// `v_i = 1 - l_i / n`, each in `(0, 1)`.
pub fn location_weights(locations: &[u32], n: usize) -> Result<Vec<f64>> {
    locations
        .iter()
        .map(|&l| {
            if l == 0 || l as usize >= n {
                Err(Error::invalid(format!(
                    "location {l} outside [1, {n}) for sentence length {n}"
                )))
            } else {
                Ok(1.0 - l as f64 / n as f64)
            }
        })
        .collect()
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Embedding ids of the memories actually attended over.
    pub memory_ids: Vec<u32>,
    pub location_weights: Vec<f64>,
    pub memories: Vec<Vec<f64>>,
    /// `states[0]` is the aspect vector; `states[k]` the output of hop `k`.
    pub states: Vec<Vec<f64>>,
    /// Per hop: tanh scores `g`.
    pub scores: Vec<Vec<f64>>,
    /// Per hop: attention `α`.
    pub attention: Vec<Vec<f64>>,
    pub probabilities: [f64; N_CLASSES],
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `W x` for a row-major `rows × x.len()` matrix.
fn matvec(w: &[f64], x: &[f64]) -> Vec<f64> {
    w.chunks_exact(x.len()).map(|row| dot(row, x)).collect()
}

/// `Wᵀ y` for a row-major `y.len() × cols` matrix.
fn matvec_t(w: &[f64], y: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &yi) in w.chunks_exact(cols).zip(y) {
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += wij * yi;
        }
    }
    out
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn forward(params: &MemNetParams, input: &MemNetInput) -> Trace {
    let d = params.dim();
    let n = input.sentence_len as f64;
    let mut memory_ids = Vec::new();
    let mut weights = Vec::new();
    let mut memories = Vec::new();
    for (&id, &l) in input.context.iter().zip(&input.locations) {
        if id == 0 {
            continue;
        }
        let v = 1.0 - l as f64 / n;
        memory_ids.push(id);
        weights.push(v);
        memories.push(params.embeddings.row(id).iter().map(|e| v * e).collect::<Vec<_>>());
    }

    let mut x0 = vec![0.0; d];
    for &a in &input.aspect {
        axpy(1.0, params.embeddings.row(a), &mut x0);
    }
    let inv = 1.0 / input.aspect.len().max(1) as f64;
    x0.iter_mut().for_each(|v| *v *= inv);

    let (w_mem, w_state) = params.w_att.split_at(d);
    let mem_scores: Vec<f64> = memories.iter().map(|m| dot(w_mem, m)).collect();
    let mut states = vec![x0];
    let mut scores = Vec::with_capacity(params.hops);
    let mut attention = Vec::with_capacity(params.hops);
    for _ in 0..params.hops {
        let prev = states.last().expect("at least the aspect state");
        let shift = dot(w_state, prev) + params.b_att;
        let g: Vec<f64> = mem_scores.iter().map(|s| (s + shift).tanh()).collect();
        let alpha = if g.is_empty() { Vec::new() } else { softmax(&g) };
        let mut next = matvec(&params.w_lin, prev);
        axpy(1.0, &params.b_lin, &mut next);
        for (a, m) in alpha.iter().zip(&memories) {
            axpy(*a, m, &mut next);
        }
        scores.push(g);
        attention.push(alpha);
        states.push(next);
    }
    let x_k = states.last().expect("final state");
    let logits: Vec<f64> = matvec(&params.w_s, x_k)
        .iter()
        .zip(&params.b_s)
        .map(|(z, b)| z + b)
        .collect();
    let p = softmax(&logits);
    Trace {
        memory_ids,
        location_weights: weights,
        memories,
        states,
        scores,
        attention,
        probabilities: [p[0], p[1], p[2]],
    }
}

/// Gradients with the shapes of [`MemNetParams`]; embedding rows are sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_att: Vec<f64>,
    pub b_att: f64,
    pub w_lin: Vec<f64>,
    pub b_lin: Vec<f64>,
    pub w_s: Vec<f64>,
    pub b_s: [f64; N_CLASSES],
    /// Present only for trainable embeddings; never holds row 0.
    pub embeddings: BTreeMap<u32, Vec<f64>>,
}

impl Gradients {
    /// Same visiting order as [`MemNetParams::for_each_weight_mut`].
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.w_att
            .iter()
            .chain(std::iter::once(&self.b_att))
            .chain(&self.w_lin)
            .chain(&self.b_lin)
            .chain(&self.w_s)
            .chain(&self.b_s)
            .copied()
    }
}

/// Cross-entropy `-ln p(gold)` and its gradients by backpropagation through
/// every hop; shared hop weights accumulate across hops.
pub fn loss_and_gradients(params: &MemNetParams, input: &MemNetInput, gold: Polarity) -> (f64, Gradients) {
    let d = params.dim();
    let trace = forward(params, input);
    let loss = -trace.probabilities[gold.index()].ln();

    let mut grads = Gradients {
        w_att: vec![0.0; 2 * d],
        b_att: 0.0,
        w_lin: vec![0.0; d * d],
        b_lin: vec![0.0; d],
        w_s: vec![0.0; N_CLASSES * d],
        b_s: [0.0; N_CLASSES],
        embeddings: BTreeMap::new(),
    };

    let mut dz = trace.probabilities;
    dz[gold.index()] -= 1.0;
    let x_k = &trace.states[params.hops];
    for c in 0..N_CLASSES {
        axpy(dz[c], x_k, &mut grads.w_s[c * d..(c + 1) * d]);
    }
    grads.b_s = dz;
    let mut dx = matvec_t(&params.w_s, &dz, d);

    let (w_mem, w_state) = params.w_att.split_at(d);
    let mut dmem = vec![vec![0.0; d]; trace.memories.len()];
    for k in (1..=params.hops).rev() {
        let prev = &trace.states[k - 1];
        let alpha = &trace.attention[k - 1];
        let g = &trace.scores[k - 1];

        // linear path
        for (row, &dxi) in grads.w_lin.chunks_exact_mut(d).zip(&dx) {
            axpy(dxi, prev, row);
        }
        axpy(1.0, &dx, &mut grads.b_lin);
        let mut dprev = matvec_t(&params.w_lin, &dx, d);

        // attention path: o = Σ α_i m_i
        let dalpha: Vec<f64> = trace.memories.iter().map(|m| dot(&dx, m)).collect();
        for (dm, &a) in dmem.iter_mut().zip(alpha) {
            axpy(a, &dx, dm);
        }
        let mean: f64 = alpha.iter().zip(&dalpha).map(|(a, da)| a * da).sum();
        for i in 0..alpha.len() {
            let dg = alpha[i] * (dalpha[i] - mean);
            let ds = dg * (1.0 - g[i] * g[i]);
            axpy(ds, &trace.memories[i], &mut grads.w_att[..d]);
            axpy(ds, prev, &mut grads.w_att[d..]);
            grads.b_att += ds;
            axpy(ds, w_mem, &mut dmem[i]);
            axpy(ds, w_state, &mut dprev);
        }
        dx = dprev;
    }

    if params.trainable_embeddings {
        let mut add = |id: u32, scale: f64, g: &[f64]| {
            if id != 0 {
                let row = grads.embeddings.entry(id).or_insert_with(|| vec![0.0; d]);
                axpy(scale, g, row);
            }
        };
        for ((&id, &v), dm) in trace.memory_ids.iter().zip(&trace.location_weights).zip(&dmem) {
            add(id, v, dm);
        }
        let inv = 1.0 / input.aspect.len().max(1) as f64;
        for &a in &input.aspect {
            add(a, inv, &dx);
        }
    }
    (loss, grads)
}

/// Maximum over every trainable scalar of `|a - n| / max(|a|, |n|, 1e-8)`
/// between the analytic gradient `a` and the central difference `n`.
pub fn grad_check(params: &MemNetParams, input: &MemNetInput, gold: Polarity, eps: f64) -> f64 {
    let (_, grads) = loss_and_gradients(params, input, gold);
    let loss_at = |p: &MemNetParams| loss_and_gradients_loss(p, input, gold);
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);

    let analytic: Vec<f64> = grads.weights().collect();
    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for (idx, &a) in analytic.iter().enumerate() {
        let original = nth_weight(&mut probe, idx, None);
        nth_weight(&mut probe, idx, Some(original + eps));
        let up = loss_at(&probe);
        nth_weight(&mut probe, idx, Some(original - eps));
        let down = loss_at(&probe);
        nth_weight(&mut probe, idx, Some(original));
        worst = worst.max(rel(a, (up - down) / (2.0 * eps)));
    }

    if params.trainable_embeddings {
        let d = params.dim();
        for id in 1..params.embeddings.rows() as u32 {
            for j in 0..d {
                let a = grads.embeddings.get(&id).map_or(0.0, |g| g[j]);
                let original = probe.embeddings.row(id)[j];
                probe.embeddings.row_mut(id)[j] = original + eps;
                let up = loss_at(&probe);
                probe.embeddings.row_mut(id)[j] = original - eps;
                let down = loss_at(&probe);
                probe.embeddings.row_mut(id)[j] = original;
                worst = worst.max(rel(a, (up - down) / (2.0 * eps)));
            }
        }
    }
    worst
}

fn loss_and_gradients_loss(params: &MemNetParams, input: &MemNetInput, gold: Polarity) -> f64 {
    -forward(params, input).probabilities[gold.index()].ln()
}

/// Reads (and optionally overwrites) the `idx`-th weight in visiting order.
fn nth_weight(params: &mut MemNetParams, idx: usize, set: Option<f64>) -> f64 {
    let mut i = 0;
    let mut out = 0.0;
    params.for_each_weight_mut(|w| {
        if i == idx {
            out = *w;
            if let Some(v) = set {
                *w = v;
            }
        }
        i += 1;
    });
    out
}

/// Argmax of the class probabilities, ties to the smaller class index.
pub fn predict_memnet(params: &MemNetParams, input: &MemNetInput) -> Polarity {
    Polarity::from_index(argmax(&forward(params, input).probabilities))
}

/// A random parameter set and query for gradient checking: `vocab_size`
/// embedding rows plus padding, weights and embeddings uniform in `[-0.5, 0.5]`,
/// `m` context words (with one padding entry mixed in when `m > 0`).
pub fn random_gradcheck_case(
    dim: usize,
    m: usize,
    hops: usize,
    trainable_embeddings: bool,
    seed: u64,
) -> (MemNetParams, MemNetInput, Polarity) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab_size = m + 3;
    let mut data = vec![0.0; (vocab_size + 1) * dim];
    data[dim..].iter_mut().for_each(|v| *v = rng.gen_range(-0.5..=0.5));
    let table = EmbeddingTable::from_rows(dim, data).expect("valid table");
    let mut params = MemNetParams::uniform(table, hops, 0.5, rng.gen());
    params.trainable_embeddings = trainable_embeddings;

    let aspect_len = rng.gen_range(1..=2);
    let aspect: Vec<u32> = (0..aspect_len).map(|_| rng.gen_range(1..=vocab_size as u32)).collect();
    let mut context: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=vocab_size as u32)).collect();
    if m > 0 {
        context.push(0);
    }
    let position = rng.gen_range(0..=context.len());
    let locations = (0..context.len())
        .map(|i| {
            if i < position {
                (position - i) as u32
            } else {
                (i - position + 1) as u32
            }
        })
        .collect();
    let input = MemNetInput {
        sentence_len: context.len() + 1,
        context,
        locations,
        aspect,
        aspect_position: position,
    };
    let gold = Polarity::from_index(rng.gen_range(0..N_CLASSES));
    (params, input, gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(d: usize, rows: usize, seed: u64) -> EmbeddingTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; rows * d];
        data[d..].iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        EmbeddingTable::from_rows(d, data).unwrap()
    }

    fn input(context: Vec<u32>, aspect: Vec<u32>) -> MemNetInput {
        let m = context.len();
        MemNetInput {
            locations: (1..=m as u32).collect(),
            context,
            aspect,
            aspect_position: 0,
            sentence_len: m + 1,
        }
    }

    #[test]
    fn location_weight_values() {
        assert_eq!(location_weights(&[1], 8).unwrap(), vec![0.875]);
        assert!(location_weights(&[], 8).unwrap().is_empty());
        assert_eq!(
            location_weights(&[1, 1, 2, 3, 4, 5, 6], 8).unwrap(),
            vec![0.875, 0.875, 0.75, 0.625, 0.5, 0.375, 0.25]
        );
        assert!(location_weights(&[8], 8).is_err());
        assert!(location_weights(&[0], 8).is_err());
    }

    #[test]
    fn softmaxes_normalize() {
        let p = MemNetParams::uniform(table(6, 10, 1), 3, 0.5, 2);
        let t = forward(&p, &input(vec![1, 2, 3, 4], vec![5]));
        assert!((t.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(t.probabilities.iter().all(|&v| v > 0.0));
        for a in &t.attention {
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(a.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn single_memory_gets_full_attention() {
        let p = MemNetParams::uniform(table(4, 5, 3), 3, 0.5, 4);
        let t = forward(&p, &input(vec![2], vec![1]));
        assert!(t.attention.iter().all(|a| a == &vec![1.0]));
    }

    #[test]
    fn zero_attention_weights_give_uniform_attention() {
        let mut p = MemNetParams::uniform(table(4, 8, 5), 2, 0.5, 6);
        p.w_att.iter_mut().for_each(|w| *w = 0.0);
        p.b_att = 0.0;
        let t = forward(&p, &input(vec![1, 2, 3, 4], vec![5]));
        for a in &t.attention {
            assert!(a.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn zero_params_give_ln3() {
        let p = MemNetParams::zeros(table(4, 5, 7), 3);
        let (loss, g) = loss_and_gradients(&p, &input(vec![1, 2], vec![3]), Polarity::Positive);
        assert!((loss - 3f64.ln()).abs() < 1e-12);
        let third = 1.0 / 3.0;
        assert!((g.b_s[0] - third).abs() < 1e-12);
        assert!((g.b_s[2] - (third - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn bias_gradient_is_probability_residual() {
        let p = MemNetParams::uniform(table(5, 9, 8), 2, 0.5, 9);
        let inp = input(vec![1, 2, 3], vec![4, 5]);
        let probs = forward(&p, &inp).probabilities;
        let (_, g) = loss_and_gradients(&p, &inp, Polarity::Neutral);
        for c in 0..3 {
            let onehot = if c == 1 { 1.0 } else { 0.0 };
            assert!((g.b_s[c] - (probs[c] - onehot)).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for hops in [1, 2, 3] {
            for m in [0, 1, 5] {
                for trainable in [false, true] {
                    let (p, inp, gold) =
                        random_gradcheck_case(8, m, hops, trainable, 100 + hops as u64 * 10 + m as u64);
                    let err = grad_check(&p, &inp, gold, 1e-5);
                    assert!(err < 1e-4, "K={hops} m={m} trainable={trainable}: {err}");
                }
            }
        }
    }

    #[test]
    fn zero_parameters_grad_check_is_finite() {
        let p = MemNetParams::zeros(table(4, 5, 10), 2);
        let err = grad_check(&p, &input(vec![1, 2, 3], vec![4]), Polarity::Negative, 1e-5);
        assert!(err.is_finite());
    }

    #[test]
    fn padding_is_ignored() {
        let p = MemNetParams::uniform(table(4, 6, 11), 3, 0.5, 12);
        let mut a = input(vec![1, 0, 2, 0, 3], vec![4]);
        a.locations = vec![1, 2, 3, 4, 5];
        let mut b = a.clone();
        b.context = vec![1, 0, 2, 0, 3];
        b.locations = vec![1, 5, 3, 2, 5];
        assert_eq!(forward(&p, &a).probabilities, forward(&p, &b).probabilities);
    }

    #[test]
    fn linear_path_degenerate_cases() {
        let mut p = MemNetParams::uniform(table(4, 6, 13), 3, 0.5, 14);
        p.w_lin.iter_mut().for_each(|w| *w = 0.0);
        p.b_lin.iter_mut().for_each(|w| *w = 0.0);
        let t = forward(&p, &input(vec![1, 2, 3], vec![4]));
        let mut o = vec![0.0; 4];
        for (a, m) in t.attention[2].iter().zip(&t.memories) {
            axpy(*a, m, &mut o);
        }
        assert_eq!(t.states[3], o);

        let t = forward(&p, &input(vec![], vec![4]));
        assert_eq!(t.states[3], vec![0.0; 4]);
        let expect = softmax(&p.b_s);
        for c in 0..3 {
            assert!((t.probabilities[c] - expect[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn shared_hop_weights() {
        let p = MemNetParams::uniform(table(4, 6, 15), 2, 0.5, 16);
        let inp = input(vec![1, 2], vec![3]);
        let base = forward(&p, &inp);
        let mut q = p.clone();
        q.w_lin[0] += 0.1;
        let moved = forward(&q, &inp);
        // one storage: both hops see the change, so hop 1 already differs
        assert_ne!(base.states[1], moved.states[1]);
        assert_ne!(base.states[2], moved.states[2]);
    }

    #[test]
    fn prediction_ties_and_argmax() {
        let p = MemNetParams::zeros(table(3, 3, 17), 1);
        assert_eq!(predict_memnet(&p, &input(vec![1], vec![2])), Polarity::Negative);
        let mut q = p.clone();
        q.b_s = [0.2f64.ln(), 0.5f64.ln(), 0.3f64.ln()];
        assert_eq!(predict_memnet(&q, &input(vec![1], vec![2])), Polarity::Neutral);
    }
}
