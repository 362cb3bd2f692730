//! Pre-trained word vectors in the GloVe text layout: one entry per line,
//! a token followed by exactly `d` space-separated decimal floats.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::textproc::Vocabulary;

/// Half-width of the uniform range for vectors of tokens missing from the file.
pub const OOV_RANGE: f64 = 0.25;

/// Raw vectors read from an embedding file.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSource {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingSource {
    /// Reads every line, keeping only tokens in `keep` when given. The
    /// dimension is fixed by the first line.
    pub fn read(path: impl AsRef<Path>, keep: Option<&HashSet<String>>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), keep).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn from_reader(reader: impl BufRead, keep: Option<&HashSet<String>>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<embeddings>", e))?;
            let lineno = lineno + 1;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let token = parts.next().unwrap_or_default();
            let values: Vec<&str> = parts.filter(|p| !p.is_empty()).collect();
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {expected} floats after token, found {}", values.len()),
                });
            }
            if keep.is_some_and(|k| !k.contains(token)) {
                continue;
            }
            let row = values
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|f| f.is_finite())
                        .ok_or_else(|| Error::Parse {
                            line: lineno,
                            message: format!("not a finite float: {v:?}"),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            vectors.entry(token.to_owned()).or_insert(row);
        }
        Ok(EmbeddingSource {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `(|vocab| + 1) × d` matrix; row 0 is the all-zero padding row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) || data.len() < dim {
            return Err(Error::invalid(format!(
                "embedding matrix of {} values is not a whole number of rows of width {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding matrix holds non-finite values"));
        }
        if data[..dim].iter().any(|&v| v != 0.0) {
            return Err(Error::invalid("embedding row 0 must be zero"));
        }
        Ok(EmbeddingTable { dim, data })
    }

    /// Every vocabulary row drawn uniformly from `[-0.25, 0.25]`.
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Self {
        Self::from_source(
            &EmbeddingSource {
                dim,
                vectors: HashMap::new(),
            },
            vocab,
            dim,
            seed,
        )
        .expect("dimensions agree")
    }

    /// Copies rows for tokens present in `source`; other rows are seeded
    /// uniform draws in vocabulary-id order. Row 0 is zeroed last.
    pub fn from_source(source: &EmbeddingSource, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if !source.is_empty() && source.dim() != dim {
            return Err(Error::invalid(format!(
                "embedding file has dimension {}, expected {dim}",
                source.dim()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; (vocab.size() + 1) * dim];
        for (i, token) in vocab.tokens().iter().enumerate() {
            let row = &mut data[(i + 1) * dim..(i + 2) * dim];
            match source.get(token) {
                Some(v) => row.copy_from_slice(v),
                None => row.iter_mut().for_each(|x| *x = rng.gen_range(-OOV_RANGE..=OOV_RANGE)),
            }
        }
        data[..dim].iter_mut().for_each(|x| *x = 0.0);
        Ok(EmbeddingTable { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let i = id as usize;
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        let i = id as usize;
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Reads `path` and builds the table for `vocab`.
pub fn load_embeddings(path: impl AsRef<Path>, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let keep: HashSet<String> = vocab.tokens().iter().cloned().collect();
    let source = EmbeddingSource::read(path, Some(&keep))?;
    EmbeddingTable::from_source(&source, vocab, dim, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = "good 0.5 -1.25 3\nbad -0.5 1e-3 0\nugly 1 2 3\n";

    fn vocab() -> Vocabulary {
        Vocabulary::from_tokens(vec!["good".into(), "missing".into(), "bad".into()]).unwrap()
    }

    #[test]
    fn present_rows_copied_verbatim() {
        let src = EmbeddingSource::from_reader(FILE.as_bytes(), None).unwrap();
        let t = EmbeddingTable::from_source(&src, &vocab(), 3, 1).unwrap();
        assert_eq!(t.rows(), 4);
        assert_eq!(t.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(t.row(1), &[0.5, -1.25, 3.0]);
        assert_eq!(t.row(3), &[-0.5, 1e-3, 0.0]);
    }

    #[test]
    fn oov_rows_seeded_and_bounded() {
        let src = EmbeddingSource::from_reader(FILE.as_bytes(), None).unwrap();
        let a = EmbeddingTable::from_source(&src, &vocab(), 3, 7).unwrap();
        let b = EmbeddingTable::from_source(&src, &vocab(), 3, 7).unwrap();
        let c = EmbeddingTable::from_source(&src, &vocab(), 3, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.row(2), c.row(2));
        assert!(a.row(2).iter().all(|v| v.abs() <= OOV_RANGE));
    }

    #[test]
    fn wrong_float_count_names_line() {
        let bad = "good 1 2 3\nbad 1 2\n";
        match EmbeddingSource::from_reader(bad.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let src = EmbeddingSource::from_reader(FILE.as_bytes(), None).unwrap();
        assert!(EmbeddingTable::from_source(&src, &vocab(), 4, 1).is_err());
    }

    #[test]
    fn filtered_read() {
        let keep: HashSet<String> = ["bad".to_string()].into();
        let src = EmbeddingSource::from_reader(FILE.as_bytes(), Some(&keep)).unwrap();
        assert_eq!(src.len(), 1);
        assert_eq!(src.dim(), 3);
    }
}
