//! Dataset ingestion, the instance data model and deterministic shuffle/split.
//!
//! On disk a dataset is JSONL: one object per line with the fields `text`,
//! `aspect`, `from`, `to`, `polarity` and an optional `id`. `from`/`to` are a
//! half-open range of Unicode scalar values into `text`; unknown extra fields
//! are ignored.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentiment label. Class indices follow the order `-1 < 0 < +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];

    pub fn index(self) -> usize {
        match self {
            Polarity::Negative => 0,
            Polarity::Neutral => 1,
            Polarity::Positive => 2,
        }
    }

    /// Panics if `index > 2`.
    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    pub fn value(self) -> i8 {
        self.index() as i8 - 1
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            -1 => Some(Polarity::Negative),
            0 => Some(Polarity::Neutral),
            1 => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
        }
    }
}

impl TryFrom<i64> for Polarity {
    type Error = String;

    fn try_from(value: i64) -> std::result::Result<Self, String> {
        Polarity::from_value(value).ok_or_else(|| format!("polarity {value} not in {{-1, 0, 1}}"))
    }
}

impl From<Polarity> for i64 {
    fn from(p: Polarity) -> i64 {
        p.value() as i64
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl std::str::FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: i64 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("not a polarity label: {s:?}")))?;
        Polarity::from_value(v).ok_or_else(|| Error::invalid(format!("polarity {v} not in {{-1, 0, 1}}")))
    }
}

/// One sentence, one aspect inside it, and the gold sentiment toward that aspect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: u64,
    pub text: String,
    pub aspect_term: String,
    /// Half-open range `[from, to)` in Unicode scalar values.
    pub aspect_char_span: (usize, usize),
    pub polarity: Polarity,
}

impl Instance {
    /// Builds an instance and checks the span invariants.
    pub fn new(
        id: u64,
        text: impl Into<String>,
        aspect_term: impl Into<String>,
        aspect_char_span: (usize, usize),
        polarity: Polarity,
    ) -> Result<Self> {
        let inst = Instance {
            id,
            text: text.into(),
            aspect_term: aspect_term.into(),
            aspect_char_span,
            polarity,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Locates the first occurrence of `aspect_term` in `text`.
    pub fn locate(
        id: u64,
        text: impl Into<String>,
        aspect_term: impl Into<String>,
        polarity: Polarity,
    ) -> Result<Self> {
        let text = text.into();
        let aspect_term = aspect_term.into();
        let byte_start = text.find(&aspect_term).ok_or_else(|| Error::Validation {
            instance: id.to_string(),
            message: format!("aspect {aspect_term:?} does not occur in text"),
        })?;
        let from = text[..byte_start].chars().count();
        let to = from + aspect_term.chars().count();
        Instance::new(id, text, aspect_term, (from, to), polarity)
    }

    pub fn validate(&self) -> Result<()> {
        let (from, to) = self.aspect_char_span;
        let len = self.text.chars().count();
        let fail = |message: String| Error::Validation {
            instance: self.id.to_string(),
            message,
        };
        if from >= to || to > len {
            return Err(fail(format!(
                "aspect span [{from}, {to}) invalid for text of length {len}"
            )));
        }
        let covered: String = self.text.chars().skip(from).take(to - from).collect();
        if covered != self.aspect_term {
            return Err(fail(format!(
                "text[{from}..{to}) is {covered:?}, expected aspect {:?}",
                self.aspect_term
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Self {
        Dataset {
            name: name.into(),
            instances,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<Polarity> {
        self.instances.iter().map(|i| i.polarity).collect()
    }

    /// Sub-dataset made of the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// JSONL serialization; always writes the `id` field.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            let rec = Record {
                text: inst.text.clone(),
                aspect: inst.aspect_term.clone(),
                from: inst.aspect_char_span.0,
                to: inst.aspect_char_span.1,
                polarity: inst.polarity.value() as i64,
                id: Some(inst.id),
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    text: String,
    aspect: String,
    from: usize,
    to: usize,
    polarity: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
}

/// Reads a JSONL dataset. The dataset is named after the file stem.
pub fn parse_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_dataset(name, BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses JSONL from any reader. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn read_dataset(name: impl Into<String>, reader: impl BufRead) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let id = rec.id.unwrap_or(instances.len() as u64);
        let label = |message: String| Error::Validation {
            instance: format!("{id} (line {lineno})"),
            message,
        };
        let polarity = Polarity::from_value(rec.polarity)
            .ok_or_else(|| label(format!("polarity {} not in {{-1, 0, 1}}", rec.polarity)))?;
        if !seen.insert(id) {
            return Err(label("duplicate instance id".into()));
        }
        let inst = Instance {
            id,
            text: rec.text,
            aspect_term: rec.aspect,
            aspect_char_span: (rec.from, rec.to),
            polarity,
        };
        inst.validate().map_err(|e| match e {
            Error::Validation { message, .. } => label(message),
            other => other,
        })?;
        instances.push(inst);
    }
    Ok(Dataset::new(name, instances))
}

/// Shuffles with a seeded generator and puts the first `round(test_fraction * n)`
/// (ties to even)
/// instances into the test side.
pub fn shuffle_split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let n = dataset.len();
    let n_test = (test_fraction * n as f64).round_ties_even() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} on {n} instances leaves an empty side ({n_test} test)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = dataset.subset(&order[..n_test]);
    let train = dataset.subset(&order[n_test..]);
    Ok((train, test))
}
