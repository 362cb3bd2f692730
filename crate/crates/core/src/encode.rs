//! Aspect encodings (aspect-sequence, bit-mask, location-sequence), zero
//! padding, and the bag-of-words / TF-IDF vectorizers for the classical models.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::textproc::{TokenizedInstance, Vocabulary};

/// Sparse real vector with a declared dimensionality. Entries are sorted by
/// index and never hold explicit zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    /// Builds a vector from `(index, value)` pairs. Duplicate indices are
    /// summed; zeros are dropped. Panics if an index is out of range.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in pairs {
            assert!((i as usize) < dim, "index {i} out of range for dimension {dim}");
            *map.entry(i).or_default() += v;
        }
        FeatureVector {
            dim,
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        FeatureVector {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i as u32, v))
                .collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        FeatureVector {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|&(i, v)| (i as usize, v))
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(index as u32), |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Concatenates `other` after `self`.
    pub fn concat(&self, other: &FeatureVector) -> FeatureVector {
        let offset = self.dim as u32;
        FeatureVector {
            dim: self.dim + other.dim,
            entries: self
                .entries
                .iter()
                .copied()
                .chain(other.entries.iter().map(|&(i, v)| (i + offset, v)))
                .collect(),
        }
    }
}

/// Unique aspect phrase → id, assigned 1, 2, 3, … in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AspectIdMap {
    ids: HashMap<String, u32>,
    phrases: Vec<String>,
}

impl AspectIdMap {
    pub fn from_phrases(phrases: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(phrases.len());
        for (i, p) in phrases.iter().enumerate() {
            if ids.insert(p.clone(), i as u32 + 1).is_some() {
                return Err(Error::invalid(format!("duplicate aspect phrase {p:?}")));
            }
        }
        Ok(AspectIdMap { ids, phrases })
    }

    pub fn id(&self, phrase: &str) -> Option<u32> {
        self.ids.get(phrase).copied()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Phrases in id order (id 1 first).
    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }
}

pub fn assign_aspect_ids(corpus: &[TokenizedInstance]) -> AspectIdMap {
    let mut map = AspectIdMap::default();
    for ti in corpus {
        let phrase = ti.aspect_phrase();
        if !map.ids.contains_key(&phrase) {
            map.phrases.push(phrase.clone());
            map.ids.insert(phrase, map.phrases.len() as u32);
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AspectMode {
    /// One entry per token; every aspect token holds the id.
    PerToken,
    /// The aspect span collapses to a single entry.
    Phrase,
}

/// Zero vector over token positions with `aspect_id` at the aspect location.
pub fn id_encode(ti: &TokenizedInstance, aspect_id: u32, mode: AspectMode) -> Vec<u32> {
    let (s, e) = ti.aspect_span;
    match mode {
        AspectMode::PerToken => (0..ti.tokens.len())
            .map(|i| if (s..e).contains(&i) { aspect_id } else { 0 })
            .collect(),
        AspectMode::Phrase => {
            let mut out = vec![0; ti.collapsed_len()];
            out[s] = aspect_id;
            out
        }
    }
}

pub fn bit_mask(ti: &TokenizedInstance) -> Vec<u32> {
    id_encode(ti, 1, AspectMode::PerToken)
}

/// Distance of every context token to the aspect, the aspect counting as a
/// single position. The aspect itself is excluded.
pub fn location_encode(ti: &TokenizedInstance) -> Vec<u32> {
    let (s, e) = ti.aspect_span;
    let before = (0..s).map(|i| (s - i) as u32);
    let after = (e..ti.tokens.len()).map(|i| (i - e + 1) as u32);
    before.chain(after).collect()
}

/// Pads `seq` with trailing zeros to exactly `max_len` entries, truncating
/// the tail when longer. Truncation that would cut into `protect` is an error.
pub fn zero_pad(seq: &[u32], max_len: usize, protect: Option<Range<usize>>) -> Result<Vec<u32>> {
    if max_len == 0 {
        return Err(Error::invalid("max_len must be at least 1"));
    }
    if seq.len() > max_len {
        if let Some(r) = protect.filter(|r| r.end > max_len && !r.is_empty()) {
            return Err(Error::Encoding(format!(
                "truncating to {max_len} would drop aspect positions {}..{}",
                r.start, r.end
            )));
        }
    }
    let mut out: Vec<u32> = seq.iter().copied().take(max_len).collect();
    out.resize(max_len, 0);
    Ok(out)
}

/// [`zero_pad`] for aspect sequences: the nonzero entries are protected.
pub fn pad_aspect_sequence(seq: &[u32], max_len: usize) -> Result<Vec<u32>> {
    let first = seq.iter().position(|&v| v != 0);
    let last = seq.iter().rposition(|&v| v != 0);
    let protect = first.zip(last).map(|(a, b)| a..b + 1);
    zero_pad(seq, max_len, protect)
}

/// Nearest-rank 95th percentile of the collapsed sentence lengths, at least 1.
pub fn default_max_len(corpus: &[TokenizedInstance]) -> usize {
    let mut lens: Vec<usize> = corpus.iter().map(|t| t.collapsed_len()).collect();
    if lens.is_empty() {
        return 1;
    }
    lens.sort_unstable();
    let rank = (0.95 * lens.len() as f64).ceil() as usize;
    lens[rank.clamp(1, lens.len()) - 1].max(1)
}

/// Binary presence vector of dimension `2 * |vocab|`: sentence block, then
/// aspect block.
pub fn one_hot_vector(ti: &TokenizedInstance, vocab: &Vocabulary) -> FeatureVector {
    let size = vocab.size() as u32;
    let sentence = ti.tokens.iter().filter_map(|t| vocab.id(t)).map(|id| (id - 1, 1.0));
    let aspect = ti
        .aspect_tokens()
        .iter()
        .filter_map(|t| vocab.id(t))
        .map(|id| (size + id - 1, 1.0));
    let mut entries: Vec<(u32, f64)> = sentence.chain(aspect).collect();
    entries.sort_by_key(|&(i, _)| i);
    entries.dedup_by_key(|&mut (i, _)| i);
    FeatureVector {
        dim: 2 * vocab.size(),
        entries,
    }
}

/// Collapsed token-id sequence: context tokens carry their vocabulary id
/// (0 when unknown), the aspect position carries `aspect_id`.
pub fn collapsed_id_sequence(ti: &TokenizedInstance, vocab: &Vocabulary, aspect_id: u32) -> Vec<u32> {
    let (s, e) = ti.aspect_span;
    let ids = |toks: &[String]| toks.iter().map(|t| vocab.id_or_pad(t)).collect::<Vec<_>>();
    let mut out = ids(&ti.tokens[..s]);
    out.push(aspect_id);
    out.extend(ids(&ti.tokens[e..]));
    out
}

/// Location-encoding features: the padded collapsed id sequence followed by
/// the padded location sequence, dimension `2 * max_len`.
pub fn location_feature_vector(
    ti: &TokenizedInstance,
    vocab: &Vocabulary,
    aspect_id: u32,
    max_len: usize,
) -> Result<FeatureVector> {
    let s = ti.aspect_span.0;
    let ids = zero_pad(&collapsed_id_sequence(ti, vocab, aspect_id), max_len, Some(s..s + 1)).map_err(|e| {
        Error::Validation {
            instance: ti.id.to_string(),
            message: e.to_string(),
        }
    })?;
    let locs = zero_pad(&location_encode(ti), max_len, None)?;
    let to_fv = |v: Vec<u32>| FeatureVector::from_dense(&v.into_iter().map(f64::from).collect::<Vec<_>>());
    Ok(to_fv(ids).concat(&to_fv(locs)))
}

/// Fitted TF-IDF vectorizer with smoothed idf `ln((1+N)/(1+df)) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    document_count: usize,
}

impl TfIdfModel {
    pub fn fit(corpus: &[TokenizedInstance], vocab: &Vocabulary) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot fit tf-idf on an empty corpus"));
        }
        let mut df = vec![0usize; vocab.size()];
        let mut seen = vec![false; vocab.size()];
        for ti in corpus {
            seen.iter_mut().for_each(|s| *s = false);
            for id in ti.tokens.iter().filter_map(|t| vocab.id(t)) {
                let j = id as usize - 1;
                if !seen[j] {
                    seen[j] = true;
                    df[j] += 1;
                }
            }
        }
        let n = corpus.len();
        let idf = df
            .iter()
            .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        Ok(TfIdfModel {
            vocab: vocab.clone(),
            idf,
            document_count: n,
        })
    }

    pub fn from_parts(vocab: Vocabulary, idf: Vec<f64>, document_count: usize) -> Result<Self> {
        if idf.len() != vocab.size() {
            return Err(Error::invalid("idf length differs from vocabulary size"));
        }
        Ok(TfIdfModel {
            vocab,
            idf,
            document_count,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// idf weights indexed by `id - 1`.
    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Raw-count tf times idf, L2-normalized unless all zero.
    pub fn transform(&self, ti: &TokenizedInstance) -> FeatureVector {
        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for id in ti.tokens.iter().filter_map(|t| self.vocab.id(t)) {
            *tf.entry(id - 1).or_default() += 1.0;
        }
        let mut entries: Vec<(u32, f64)> = tf.into_iter().map(|(j, c)| (j, c * self.idf[j as usize])).collect();
        let norm = entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            entries.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        FeatureVector {
            dim: self.dim(),
            entries,
        }
    }
}

/// The four encodings of one instance, as printed by `absa encode`.
#[derive(Debug, Clone, Serialize)]
pub struct EncodingReport {
    pub aspect_sequence: Vec<u32>,
    pub bit_mask: Vec<u32>,
    pub location_sequence: Vec<u32>,
    pub tfidf: BTreeMap<u32, f64>,
}

impl EncodingReport {
    pub fn new(ti: &TokenizedInstance, aspect_ids: &AspectIdMap, tfidf: &TfIdfModel) -> Self {
        let aspect_id = aspect_ids.id(&ti.aspect_phrase()).unwrap_or(0);
        EncodingReport {
            aspect_sequence: id_encode(ti, aspect_id, AspectMode::PerToken),
            bit_mask: bit_mask(ti),
            location_sequence: location_encode(ti),
            tfidf: tfidf.transform(ti).iter().map(|(i, v)| (i as u32, v)).collect(),
        }
    }
}
