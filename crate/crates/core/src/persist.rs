//! `.absa` model archives.
//!
//! Layout: the magic bytes `ABSA`, a little-endian `u32` header length, the
//! UTF-8 JSON header, a little-endian `u64` count of doubles, then that many
//! little-endian IEEE-754 doubles. Every real-valued parameter lives in the
//! payload and is referenced from the header by `{offset, len}`, so numbers
//! round-trip bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classic::tree::{DecisionTree, Node, Tree};
use crate::classic::{ClassicModel, Forest, GradientBoosting, LinearSvm, Majority, NaiveBayes, N_CLASSES};
use crate::corpus::Polarity;
use crate::encode::{AspectIdMap, TfIdfModel};
use crate::error::{Error, Result};
use crate::memnet::{EmbeddingTable, MemNetParams};
use crate::pipeline::{FeatureMode, FittedModel, FittedPipeline, ModelSpec};
use crate::textproc::Vocabulary;

pub const MAGIC: &[u8; 4] = b"ABSA";
pub const FORMAT_VERSION: u64 = 1;
pub const EXTENSION: &str = "absa";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayRef {
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub hyperparameters: ModelSpec,
    /// RFC 3339 UTC with fixed width, so re-saves differ only in these bytes.
    pub created: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum NodeRecord {
    Split { feature: usize, left: usize, right: usize },
    Leaf,
}

/// Thresholds (split nodes in order) and leaf values (leaves in order,
/// `value_len` each) sit in the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TreeRecord {
    nodes: Vec<NodeRecord>,
    value_len: usize,
    thresholds: ArrayRef,
    values: ArrayRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelRecord {
    Majority {
        dim: usize,
        class: Polarity,
    },
    Nb {
        dim: usize,
        log_prior: ArrayRef,
        log_likelihood: ArrayRef,
    },
    Dtree {
        dim: usize,
        tree: TreeRecord,
    },
    Svm {
        dim: usize,
        weights: ArrayRef,
        bias: ArrayRef,
    },
    Rf {
        dim: usize,
        trees: Vec<TreeRecord>,
    },
    Etc {
        dim: usize,
        trees: Vec<TreeRecord>,
    },
    Gbt {
        dim: usize,
        learning_rate: ArrayRef,
        rounds: Vec<[TreeRecord; N_CLASSES]>,
    },
    Memnet {
        hops: usize,
        dim: usize,
        trainable_embeddings: bool,
        w_att: ArrayRef,
        b_att: ArrayRef,
        w_lin: ArrayRef,
        b_lin: ArrayRef,
        w_s: ArrayRef,
        b_s: ArrayRef,
        embeddings: ArrayRef,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TfIdfRecord {
    document_count: usize,
    idf: ArrayRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u64,
    kind: String,
    metadata: Metadata,
    features: FeatureMode,
    max_len: usize,
    stoplist: Option<Vec<String>>,
    /// Tokens in id order starting at 1.
    vocabulary: Vec<String>,
    /// Phrases in id order starting at 1.
    aspect_ids: Vec<String>,
    tfidf: Option<TfIdfRecord>,
    model: ModelRecord,
}

#[derive(Default)]
struct PayloadWriter {
    data: Vec<f64>,
}

impl PayloadWriter {
    fn push(&mut self, values: &[f64]) -> ArrayRef {
        let r = ArrayRef {
            offset: self.data.len(),
            len: values.len(),
        };
        self.data.extend_from_slice(values);
        r
    }

    fn tree(&mut self, tree: &Tree) -> TreeRecord {
        let mut thresholds = Vec::new();
        let mut values = Vec::new();
        let mut value_len = 0;
        let nodes = tree
            .nodes
            .iter()
            .map(|n| match n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    thresholds.push(*threshold);
                    NodeRecord::Split {
                        feature: *feature,
                        left: *left,
                        right: *right,
                    }
                }
                Node::Leaf { value } => {
                    value_len = value.len();
                    values.extend_from_slice(value);
                    NodeRecord::Leaf
                }
            })
            .collect();
        TreeRecord {
            nodes,
            value_len,
            thresholds: self.push(&thresholds),
            values: self.push(&values),
        }
    }
}

struct PayloadReader<'a> {
    data: &'a [f64],
}

impl PayloadReader<'_> {
    fn get(&self, r: ArrayRef) -> Result<&[f64]> {
        r.offset
            .checked_add(r.len)
            .and_then(|end| self.data.get(r.offset..end))
            .ok_or_else(|| {
                Error::Corrupt(format!(
                    "array {}+{} outside payload of {}",
                    r.offset,
                    r.len,
                    self.data.len()
                ))
            })
    }

    fn exact(&self, r: ArrayRef, len: usize, what: &str) -> Result<&[f64]> {
        let v = self.get(r)?;
        if v.len() != len {
            return Err(Error::Corrupt(format!("{what} has {} values, expected {len}", v.len())));
        }
        Ok(v)
    }

    fn scalar(&self, r: ArrayRef, what: &str) -> Result<f64> {
        Ok(self.exact(r, 1, what)?[0])
    }

    fn tree(&self, rec: &TreeRecord, dim: usize) -> Result<Tree> {
        let n_splits = rec
            .nodes
            .iter()
            .filter(|n| matches!(n, NodeRecord::Split { .. }))
            .count();
        let n_leaves = rec.nodes.len() - n_splits;
        let thresholds = self.exact(rec.thresholds, n_splits, "tree thresholds")?;
        let values = self.exact(rec.values, n_leaves * rec.value_len, "tree leaf values")?;
        let mut t = thresholds.iter();
        let mut v = values.chunks(rec.value_len.max(1));
        let n = rec.nodes.len();
        let nodes = rec
            .nodes
            .iter()
            .map(|node| match node {
                NodeRecord::Split { feature, left, right } => {
                    if *feature >= dim || *left >= n || *right >= n {
                        return Err(Error::Corrupt("tree split references are out of range".into()));
                    }
                    Ok(Node::Split {
                        feature: *feature,
                        threshold: *t.next().expect("counted"),
                        left: *left,
                        right: *right,
                    })
                }
                NodeRecord::Leaf => Ok(Node::Leaf {
                    value: if rec.value_len == 0 {
                        Vec::new()
                    } else {
                        v.next().expect("counted").to_vec()
                    },
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if nodes.is_empty() {
            return Err(Error::Corrupt("tree has no nodes".into()));
        }
        Ok(Tree { nodes })
    }
}

fn timestamp() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string()
}

fn model_record(model: &FittedModel, pw: &mut PayloadWriter) -> ModelRecord {
    match model {
        FittedModel::Classic(m) => match m {
            ClassicModel::Majority(m) => ModelRecord::Majority {
                dim: m.dim,
                class: m.class,
            },
            ClassicModel::NaiveBayes(m) => ModelRecord::Nb {
                dim: m.dim(),
                log_prior: pw.push(&m.log_prior),
                log_likelihood: pw.push(&m.log_likelihood),
            },
            ClassicModel::DecisionTree(m) => ModelRecord::Dtree {
                dim: m.dim,
                tree: pw.tree(&m.tree),
            },
            ClassicModel::Svm(m) => ModelRecord::Svm {
                dim: m.dim(),
                weights: pw.push(&m.weights.concat()),
                bias: pw.push(&m.bias),
            },
            ClassicModel::RandomForest(m) => ModelRecord::Rf {
                dim: m.dim,
                trees: m.trees.iter().map(|t| pw.tree(t)).collect(),
            },
            ClassicModel::ExtraTrees(m) => ModelRecord::Etc {
                dim: m.dim,
                trees: m.trees.iter().map(|t| pw.tree(t)).collect(),
            },
            ClassicModel::GradientBoosting(m) => ModelRecord::Gbt {
                dim: m.dim,
                learning_rate: pw.push(&[m.learning_rate]),
                rounds: m.rounds.iter().map(|r| [0, 1, 2].map(|c| pw.tree(&r[c]))).collect(),
            },
        },
        FittedModel::Memnet(p) => ModelRecord::Memnet {
            hops: p.hops,
            dim: p.dim(),
            trainable_embeddings: p.trainable_embeddings,
            w_att: pw.push(&p.w_att),
            b_att: pw.push(&[p.b_att]),
            w_lin: pw.push(&p.w_lin),
            b_lin: pw.push(&p.b_lin),
            w_s: pw.push(&p.w_s),
            b_s: pw.push(&p.b_s),
            embeddings: pw.push(p.embeddings.as_slice()),
        },
    }
}

fn restore_model(rec: &ModelRecord, pr: &PayloadReader) -> Result<FittedModel> {
    let classic = |m| Ok(FittedModel::Classic(m));
    match rec {
        ModelRecord::Majority { dim, class } => classic(ClassicModel::Majority(Majority {
            dim: *dim,
            class: *class,
        })),
        ModelRecord::Nb {
            dim,
            log_prior,
            log_likelihood,
        } => {
            let prior = pr.exact(*log_prior, N_CLASSES, "class priors")?;
            let ll = pr.exact(*log_likelihood, N_CLASSES * dim, "likelihood table")?;
            let nb = NaiveBayes::from_parts([prior[0], prior[1], prior[2]], ll.to_vec())
                .map_err(|e| Error::Corrupt(e.to_string()))?;
            classic(ClassicModel::NaiveBayes(nb))
        }
        ModelRecord::Dtree { dim, tree } => classic(ClassicModel::DecisionTree(DecisionTree {
            dim: *dim,
            tree: pr.tree(tree, *dim)?,
        })),
        ModelRecord::Svm { dim, weights, bias } => {
            let w = pr.exact(*weights, N_CLASSES * dim, "svm weights")?;
            let b = pr.exact(*bias, N_CLASSES, "svm bias")?;
            classic(ClassicModel::Svm(LinearSvm {
                weights: (0..N_CLASSES).map(|c| w[c * dim..(c + 1) * dim].to_vec()).collect(),
                bias: [b[0], b[1], b[2]],
            }))
        }
        ModelRecord::Rf { dim, trees } | ModelRecord::Etc { dim, trees } => {
            let forest = Forest {
                dim: *dim,
                trees: trees.iter().map(|t| pr.tree(t, *dim)).collect::<Result<_>>()?,
            };
            classic(if matches!(rec, ModelRecord::Rf { .. }) {
                ClassicModel::RandomForest(forest)
            } else {
                ClassicModel::ExtraTrees(forest)
            })
        }
        ModelRecord::Gbt {
            dim,
            learning_rate,
            rounds,
        } => {
            let rounds = rounds
                .iter()
                .map(|r| Ok([pr.tree(&r[0], *dim)?, pr.tree(&r[1], *dim)?, pr.tree(&r[2], *dim)?]))
                .collect::<Result<_>>()?;
            classic(ClassicModel::GradientBoosting(GradientBoosting {
                dim: *dim,
                learning_rate: pr.scalar(*learning_rate, "learning rate")?,
                rounds,
            }))
        }
        ModelRecord::Memnet {
            hops,
            dim,
            trainable_embeddings,
            w_att,
            b_att,
            w_lin,
            b_lin,
            w_s,
            b_s,
            embeddings,
        } => {
            let d = *dim;
            let table = EmbeddingTable::from_rows(d, pr.get(*embeddings)?.to_vec())
                .map_err(|e| Error::Corrupt(e.to_string()))?;
            let bs = pr.exact(*b_s, N_CLASSES, "output bias")?;
            let params = MemNetParams {
                hops: *hops,
                w_att: pr.exact(*w_att, 2 * d, "attention weights")?.to_vec(),
                b_att: pr.scalar(*b_att, "attention bias")?,
                w_lin: pr.exact(*w_lin, d * d, "linear weights")?.to_vec(),
                b_lin: pr.exact(*b_lin, d, "linear bias")?.to_vec(),
                w_s: pr.exact(*w_s, N_CLASSES * d, "output weights")?.to_vec(),
                b_s: [bs[0], bs[1], bs[2]],
                embeddings: table,
                trainable_embeddings: *trainable_embeddings,
            };
            params.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
            Ok(FittedModel::Memnet(params))
        }
    }
}

/// Serializes a fitted pipeline to archive bytes.
pub fn to_bytes(p: &FittedPipeline) -> Vec<u8> {
    let mut pw = PayloadWriter::default();
    let tfidf = p.tfidf.as_ref().map(|t| TfIdfRecord {
        document_count: t.document_count(),
        idf: pw.push(t.idf()),
    });
    let model = model_record(&p.model, &mut pw);
    let header = Header {
        format_version: FORMAT_VERSION,
        kind: p.kind().name().to_owned(),
        metadata: Metadata {
            seed: p.seed,
            hyperparameters: p.spec.clone(),
            created: timestamp(),
        },
        features: p.features,
        max_len: p.max_len,
        stoplist: p.stoplist.clone(),
        vocabulary: p.vocab.tokens().to_vec(),
        aspect_ids: p.aspect_ids.phrases().to_vec(),
        tfidf,
        model,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * pw.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(pw.data.len() as u64).to_le_bytes());
    for v in &pw.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Corrupt(format!("truncated archive: missing {what}")));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

/// Parses archive bytes. The format version is checked before the rest of
/// the header is interpreted.
pub fn from_bytes(bytes: &[u8]) -> Result<FittedPipeline> {
    let mut rest = bytes;
    if take(&mut rest, 4, "magic")? != MAGIC {
        return Err(Error::Corrupt("not an .absa archive (bad magic)".into()));
    }
    let len = u32::from_le_bytes(take(&mut rest, 4, "header length")?.try_into().expect("4 bytes")) as usize;
    let header_bytes = take(&mut rest, len, "header")?;
    let value: serde_json::Value =
        serde_json::from_slice(header_bytes).map_err(|e| Error::Corrupt(format!("header is not JSON: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Corrupt("header lacks format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let header: Header = serde_json::from_value(value).map_err(|e| Error::Corrupt(format!("bad header: {e}")))?;

    let count = u64::from_le_bytes(take(&mut rest, 8, "payload length")?.try_into().expect("8 bytes")) as usize;
    let byte_len = count
        .checked_mul(8)
        .ok_or_else(|| Error::Corrupt("payload length overflows".into()))?;
    let raw = take(&mut rest, byte_len, "payload")?;
    if !rest.is_empty() {
        return Err(Error::Corrupt(format!("{} trailing bytes after payload", rest.len())));
    }
    let data: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let pr = PayloadReader { data: &data };

    let corrupt = |e: Error| Error::Corrupt(e.to_string());
    let vocab = Vocabulary::from_tokens(header.vocabulary).map_err(corrupt)?;
    let aspect_ids = AspectIdMap::from_phrases(header.aspect_ids).map_err(corrupt)?;
    let tfidf = header
        .tfidf
        .map(|t| {
            let idf = pr.exact(t.idf, vocab.size(), "idf vector")?.to_vec();
            TfIdfModel::from_parts(vocab.clone(), idf, t.document_count).map_err(corrupt)
        })
        .transpose()?;
    let model = restore_model(&header.model, &pr)?;
    let pipeline = FittedPipeline {
        features: header.features,
        spec: header.metadata.hyperparameters,
        seed: header.metadata.seed,
        stoplist: header.stoplist,
        vocab,
        aspect_ids,
        tfidf,
        max_len: header.max_len,
        model,
    };
    if pipeline.kind().name() != header.kind {
        return Err(Error::Corrupt(format!(
            "kind tag {:?} disagrees with stored hyperparameters ({})",
            header.kind,
            pipeline.kind()
        )));
    }
    Ok(pipeline)
}

/// Writes atomically: a temporary file in the target directory is renamed
/// over `path`.
pub fn save(p: &FittedPipeline, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let bytes = to_bytes(p);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<FittedPipeline> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
