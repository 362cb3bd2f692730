//! Synthetic corpora and embedding files shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use absa::{Dataset, Instance, Polarity};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POSITIVE: [&str; 6] = ["great", "excellent", "superb", "lovely", "wonderful", "fantastic"];
pub const NEGATIVE: [&str; 6] = ["awful", "terrible", "horrible", "dreadful", "lousy", "disgusting"];
pub const NEUTRAL: [&str; 6] = ["average", "ordinary", "standard", "typical", "unremarkable", "usual"];
pub const ASPECTS: [&str; 12] = [
    "pizza", "waiter", "music", "patio", "dessert", "menu", "coffee", "bread", "salad", "decor", "pasta", "wine",
];
pub const FILLERS: [&str; 6] = ["honestly", "yesterday", "tonight", "overall", "really", "frankly"];

pub fn words_for(p: Polarity) -> &'static [&'static str] {
    match p {
        Polarity::Positive => &POSITIVE,
        Polarity::Negative => &NEGATIVE,
        Polarity::Neutral => &NEUTRAL,
    }
}

/// Every word the generators can emit.
pub fn lexicon() -> Vec<&'static str> {
    let mut v: Vec<&str> = POSITIVE
        .iter()
        .chain(&NEGATIVE)
        .chain(&NEUTRAL)
        .chain(&ASPECTS)
        .chain(&FILLERS)
        .copied()
        .collect();
    v.extend(["the", "was", "is", "i", "thought", "but", "and", "a", "it"]);
    v
}

fn draw_label(rng: &mut ChaCha8Rng, weights: [f64; 3]) -> Polarity {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (c, w) in weights.iter().enumerate() {
        if u < *w {
            return Polarity::from_index(c);
        }
        u -= w;
    }
    Polarity::Positive
}

/// Single-aspect sentences whose label is fixed by one sentiment word.
/// `weights` are the class proportions in `-1, 0, +1` order.
pub fn single_aspect_corpus(n: usize, weights: [f64; 3], seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for id in 0..n {
        let label = draw_label(&mut rng, weights);
        let a = ASPECTS.choose(&mut rng).unwrap();
        let w = words_for(label).choose(&mut rng).unwrap();
        let f = FILLERS.choose(&mut rng).unwrap();
        let text = match rng.gen_range(0..3) {
            0 => format!("the {a} was {w}"),
            1 => format!("i thought the {a} was {w} {f}"),
            _ => format!("{f} the {a} is {w}"),
        };
        out.push(Instance::locate(id as u64, text, *a, label).unwrap());
    }
    Dataset::new("synthetic", out)
}

/// Sentences with two aspects of opposite sentiment; instance `2i` is the
/// first aspect of sentence `i`, instance `2i + 1` the second.
pub fn two_aspect_corpus(n_sentences: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * n_sentences);
    for s in 0..n_sentences {
        let mut pair: Vec<&str> = ASPECTS.choose_multiple(&mut rng, 2).copied().collect();
        pair.shuffle(&mut rng);
        let (p1, p2) = if rng.gen_bool(0.5) {
            (Polarity::Positive, Polarity::Negative)
        } else {
            (Polarity::Negative, Polarity::Positive)
        };
        let w1 = words_for(p1).choose(&mut rng).unwrap();
        let w2 = words_for(p2).choose(&mut rng).unwrap();
        let f1 = FILLERS.choose(&mut rng).unwrap();
        let f2 = FILLERS.choose(&mut rng).unwrap();
        let text = format!("the {} was {w1} {f1} but {f2} {w2} {}", pair[0], pair[1]);
        out.push(Instance::locate(2 * s as u64, text.clone(), pair[0], p1).unwrap());
        out.push(Instance::locate(2 * s as u64 + 1, text, pair[1], p2).unwrap());
    }
    Dataset::new("two-aspect", out)
}

/// Writes seeded uniform `[-1, 1]` vectors for `words` in GloVe text format.
pub fn write_embeddings(dir: &Path, words: &[&str], dim: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for w in words {
        text.push_str(w);
        for _ in 0..dim {
            let _ = write!(text, " {:.6}", rng.gen_range(-1.0..1.0f64));
        }
        text.push('\n');
    }
    let path = dir.join("vectors.txt");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn accuracy(gold: &[Polarity], pred: &[Polarity]) -> f64 {
    gold.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / gold.len() as f64
}
