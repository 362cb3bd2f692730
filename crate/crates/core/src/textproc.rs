//! Tokenization, aspect alignment, stop-word removal and vocabularies.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::corpus::{Instance, Polarity};
use crate::error::{Error, Result};

/// Characters replaced by a space before splitting.
pub const FILTERS: &str = "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n";

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

fn is_separator(c: char) -> bool {
    c == ' ' || FILTERS.contains(c)
}

/// A token together with the half-open range of source characters it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    text: String,
    start: usize,
    end: usize,
}

fn tokenize_with_offsets(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current: Option<Token> = None;
    for (pos, c) in text.chars().enumerate() {
        for lc in c.to_lowercase() {
            if is_separator(lc) {
                if let Some(tok) = current.take() {
                    out.push(tok);
                }
            } else {
                let tok = current.get_or_insert_with(|| Token {
                    text: String::new(),
                    start: pos,
                    end: pos,
                });
                tok.text.push(lc);
                tok.end = pos + 1;
            }
        }
    }
    out.extend(current);
    out
}

/// Lowercases, maps every [`FILTERS`] character to a space and splits on
/// runs of spaces.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text).into_iter().map(|t| t.text).collect()
}

/// Maps a character span onto the minimal covering token range `[start, end)`.
///
/// Fails when the span holds no token characters, or when it cuts a token
/// so the covered tokens differ from the tokenized aspect text.
pub fn align_aspect_span(text: &str, char_span: (usize, usize)) -> Result<(usize, usize)> {
    let (from, to) = char_span;
    let tokens = tokenize_with_offsets(text);
    let mut hit = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.start < to && t.end > from)
        .map(|(i, _)| i);
    let start = hit
        .next()
        .ok_or_else(|| Error::Alignment(format!("span [{from}, {to}) contains no token characters")))?;
    let end = hit.next_back().unwrap_or(start) + 1;
    let aspect_text: String = text.chars().skip(from).take(to.saturating_sub(from)).collect();
    let expected = tokenize(&aspect_text);
    let covered: Vec<&str> = tokens[start..end].iter().map(|t| t.text.as_str()).collect();
    if covered != expected {
        return Err(Error::Alignment(format!(
            "span [{from}, {to}) cuts through a token: covers {:?}, aspect tokenizes to {:?}",
            covered.join(" "),
            expected.join(" ")
        )));
    }
    Ok((start, end))
}

/// Sentence tokens with the aspect located as a token range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedInstance {
    pub id: u64,
    pub tokens: Vec<String>,
    /// Half-open `[start, end)` into `tokens`.
    pub aspect_span: (usize, usize),
    pub polarity: Polarity,
}

impl TokenizedInstance {
    pub fn new(tokens: Vec<String>, aspect_span: (usize, usize), polarity: Polarity) -> Self {
        debug_assert!(aspect_span.0 < aspect_span.1 && aspect_span.1 <= tokens.len());
        TokenizedInstance {
            id: 0,
            tokens,
            aspect_span,
            polarity,
        }
    }

    /// Convenience constructor from whitespace-separated words.
    pub fn from_words(words: &str, aspect_span: (usize, usize), polarity: Polarity) -> Self {
        Self::new(
            words.split_whitespace().map(str::to_owned).collect(),
            aspect_span,
            polarity,
        )
    }

    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let tokens = tokenize(&inst.text);
        let aspect_span = align_aspect_span(&inst.text, inst.aspect_char_span).map_err(|e| Error::Validation {
            instance: inst.id.to_string(),
            message: e.to_string(),
        })?;
        Ok(TokenizedInstance {
            id: inst.id,
            tokens,
            aspect_span,
            polarity: inst.polarity,
        })
    }

    pub fn aspect_tokens(&self) -> &[String] {
        &self.tokens[self.aspect_span.0..self.aspect_span.1]
    }

    pub fn aspect_len(&self) -> usize {
        self.aspect_span.1 - self.aspect_span.0
    }

    /// Aspect tokens joined by single spaces.
    pub fn aspect_phrase(&self) -> String {
        self.aspect_tokens().join(" ")
    }

    /// Sentence length with the aspect counted as one position.
    pub fn collapsed_len(&self) -> usize {
        self.tokens.len() - self.aspect_len() + 1
    }

    /// Tokens outside the aspect span, in sentence order.
    pub fn context_tokens(&self) -> impl Iterator<Item = &String> {
        let (s, e) = self.aspect_span;
        self.tokens[..s].iter().chain(&self.tokens[e..])
    }
}

/// Drops stop-words outside the aspect span and re-indexes the span.
pub fn remove_stopwords(ti: &TokenizedInstance, stoplist: &HashSet<String>) -> TokenizedInstance {
    let (s, e) = ti.aspect_span;
    let mut tokens = Vec::with_capacity(ti.tokens.len());
    let mut new_start = 0;
    for (i, tok) in ti.tokens.iter().enumerate() {
        if i == s {
            new_start = tokens.len();
        }
        if (s..e).contains(&i) || !stoplist.contains(tok) {
            tokens.push(tok.clone());
        }
    }
    TokenizedInstance {
        id: ti.id,
        tokens,
        aspect_span: (new_start, new_start + (e - s)),
        polarity: ti.polarity,
    }
}

/// Parses a stop-word list: one token per line, `#` lines are comments.
pub fn parse_stoplist(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

pub fn load_stoplist(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stoplist(&text))
}

/// The bundled English stop-word list. Negations are deliberately absent.
pub fn default_stoplist() -> HashSet<String> {
    parse_stoplist(DEFAULT_STOPWORDS)
}

/// Token ↔ id bijection over `1..=size`; id 0 is padding.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary whose ids follow the order of `tokens` starting at 1.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if token_to_id.insert(t.clone(), i as u32 + 1).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token: tokens,
        })
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    /// Unknown tokens map to the padding id 0.
    pub fn id_or_pad(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(0)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        if id == 0 {
            return None;
        }
        self.id_to_token.get(id as usize - 1).map(String::as_str)
    }

    /// Tokens in id order (id 1 first).
    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }
}

/// Assigns ids by descending corpus frequency, ties broken lexicographically.
pub fn build_vocab(corpus: &[TokenizedInstance], min_freq: usize) -> Vocabulary {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for ti in corpus {
        for tok in &ti.tokens {
            *counts.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_freq.max(1)).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocabulary::from_tokens(kept.into_iter().map(|(t, _)| t.to_owned()).collect()).expect("counted tokens are distinct")
}
