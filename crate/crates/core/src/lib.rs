//! Aspect-based sentiment analysis toolkit.
//!
//! Given a sentence and one aspect term inside it, predict the sentiment the
//! sentence expresses toward that aspect: negative (-1), neutral (0) or
//! positive (+1). The crate covers the whole pipeline:
//!
//! - [`corpus`]: JSONL dataset ingestion and deterministic shuffle/split.
//! - [`textproc`]: tokenization, aspect alignment, stop-word removal, vocabularies.
//! - [`encode`]: aspect-sequence, bit-mask and location encodings, bag-of-words and TF-IDF.
//! - [`classic`]: naive Bayes, CART, linear SVM, random forest, extra trees, gradient boosting.
//! - [`memnet`]: a multi-hop deep memory network with hand-written backpropagation.
//! - [`pipeline`]: feature mode plus model choice, fitted end to end.
//! - [`eval`]: stratified k-fold, per-class metrics and the cross-validation report.
//! - [`persist`]: the `.absa` model archive.
//! - [`cli`]: the `absa` command-line driver.
//!
//! ## Feature flags
//!
//! - `parallel` (default): fits forest trees, per-class boosting trees,
//!   one-vs-rest SVM heads and cross-validation folds on the rayon thread
//!   pool. Results are identical with the feature disabled: every random
//!   stream is derived from the master seed, never from scheduling.

pub mod classic;
pub mod cli;
pub mod corpus;
pub mod encode;
mod error;
pub mod eval;
pub mod exec;
pub mod memnet;
pub mod persist;
pub mod pipeline;
pub mod textproc;

pub use crate::corpus::{Dataset, Instance, Polarity};
pub use crate::error::{Error, Result};
