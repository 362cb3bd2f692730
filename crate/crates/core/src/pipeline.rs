//! End-to-end fit/predict: tokenization, optional stop-word removal, feature
//! encoding and one model, all fitted on the training data only.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classic::{BoostParams, ForestParams, SvmParams, TreeParams};
use crate::classic::{ClassicModel, Hyperparams};
use crate::corpus::{Dataset, Instance, Polarity};
use crate::encode::{
    assign_aspect_ids, default_max_len, location_feature_vector, one_hot_vector, AspectIdMap, FeatureVector, TfIdfModel,
};
use crate::error::{Error, Result};
use crate::memnet::{self, EmbeddingSource, EmbeddingTable, MemNetInput, MemNetParams, TrainParams};
use crate::textproc::{build_vocab, default_stoplist, remove_stopwords, TokenizedInstance, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Binary bag of words with an aspect channel.
    Oh,
    /// Padded collapsed id sequence plus padded location sequence.
    Le,
    Tfidf,
    Memnet,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 4] = [
        FeatureMode::Oh,
        FeatureMode::Le,
        FeatureMode::Tfidf,
        FeatureMode::Memnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Oh => "oh",
            FeatureMode::Le => "le",
            FeatureMode::Tfidf => "tfidf",
            FeatureMode::Memnet => "memnet",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature mode {s:?} (expected oh, le, tfidf or memnet)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Majority,
    Nb,
    Dtree,
    Svm,
    Rf,
    Etc,
    Gbt,
    Memnet,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Majority,
        ModelKind::Nb,
        ModelKind::Dtree,
        ModelKind::Svm,
        ModelKind::Rf,
        ModelKind::Etc,
        ModelKind::Gbt,
        ModelKind::Memnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Majority => "majority",
            ModelKind::Nb => "nb",
            ModelKind::Dtree => "dtree",
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
            ModelKind::Etc => "etc",
            ModelKind::Gbt => "gbt",
            ModelKind::Memnet => "memnet",
        }
    }

    /// Display label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Majority => "Majority",
            ModelKind::Nb => "Naive Bayes",
            ModelKind::Dtree => "Decision Tree",
            ModelKind::Svm => "SVM",
            ModelKind::Rf => "Random Forest",
            ModelKind::Etc => "Extra Trees",
            ModelKind::Gbt => "Gradient Boosting",
            ModelKind::Memnet => "MemNet",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model kind {s:?}")))
    }
}

/// Training settings of the configured model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Classic(Hyperparams),
    Memnet(TrainParams),
}

impl ModelSpec {
    /// Default settings for `kind` with every seed set to `seed`.
    pub fn defaults(kind: ModelKind, seed: u64) -> Self {
        let classic = ModelSpec::Classic;
        match kind {
            ModelKind::Majority => classic(Hyperparams::Majority),
            ModelKind::Nb => classic(Hyperparams::naive_bayes()),
            ModelKind::Dtree => classic(Hyperparams::DecisionTree(TreeParams::default())),
            ModelKind::Svm => classic(Hyperparams::Svm(SvmParams {
                seed,
                ..SvmParams::default()
            })),
            ModelKind::Rf => classic(Hyperparams::RandomForest(ForestParams::random_forest(seed))),
            ModelKind::Etc => classic(Hyperparams::ExtraTrees(ForestParams::extra_trees(seed))),
            ModelKind::Gbt => classic(Hyperparams::GradientBoosting(BoostParams {
                seed,
                ..BoostParams::default()
            })),
            ModelKind::Memnet => ModelSpec::Memnet(TrainParams {
                seed,
                ..TrainParams::default()
            }),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Memnet(_) => ModelKind::Memnet,
            ModelSpec::Classic(h) => match h {
                Hyperparams::Majority => ModelKind::Majority,
                Hyperparams::NaiveBayes { .. } => ModelKind::Nb,
                Hyperparams::DecisionTree(_) => ModelKind::Dtree,
                Hyperparams::Svm(_) => ModelKind::Svm,
                Hyperparams::RandomForest(_) => ModelKind::Rf,
                Hyperparams::ExtraTrees(_) => ModelKind::Etc,
                Hyperparams::GradientBoosting(_) => ModelKind::Gbt,
            },
        }
    }
}

#[derive(Clone)]
pub struct PipelineConfig {
    pub features: FeatureMode,
    pub model: ModelSpec,
    pub seed: u64,
    /// Applied after aspect alignment; aspect tokens are never removed.
    pub stoplist: Option<Arc<HashSet<String>>>,
    /// Defaults to the 95th-percentile training length.
    pub max_len: Option<usize>,
    /// Pre-trained vectors for the memory network; rows missing here are
    /// drawn from the seed.
    pub embeddings: Option<Arc<EmbeddingSource>>,
}

impl fmt::Debug for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineConfig")
            .field("features", &self.features)
            .field("model", &self.model)
            .field("seed", &self.seed)
            .field("stoplist_len", &self.stoplist.as_ref().map(|s| s.len()))
            .field("max_len", &self.max_len)
            .field(
                "embeddings",
                &self
                    .embeddings
                    .as_ref()
                    .map(|e| format!("{} vectors of dim {}", e.len(), e.dim())),
            )
            .finish()
    }
}

impl PipelineConfig {
    /// Defaults for `kind` under `features`; the memory network also gets the
    /// bundled stop-word list.
    pub fn new(features: FeatureMode, kind: ModelKind, seed: u64) -> Self {
        let stoplist = (kind == ModelKind::Memnet).then(|| Arc::new(default_stoplist()));
        PipelineConfig {
            features,
            model: ModelSpec::defaults(kind, seed),
            seed,
            stoplist,
            max_len: None,
            embeddings: None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn validate(&self) -> Result<()> {
        let memnet_model = self.kind() == ModelKind::Memnet;
        if memnet_model != (self.features == FeatureMode::Memnet) {
            return Err(Error::invalid(format!(
                "model {} is incompatible with feature mode {}",
                self.kind(),
                self.features
            )));
        }
        if self.max_len == Some(0) {
            return Err(Error::invalid("max_len must be at least 1"));
        }
        match &self.model {
            ModelSpec::Classic(h) => h.validate(),
            ModelSpec::Memnet(tp) => {
                tp.validate()?;
                match &self.embeddings {
                    Some(src) if !src.is_empty() && src.dim() != tp.dim => Err(Error::DimensionMismatch {
                        expected: tp.dim,
                        actual: src.dim(),
                    }),
                    _ => Ok(()),
                }
            }
        }
    }

    pub fn fit(&self, train: &Dataset) -> Result<FittedPipeline> {
        self.validate()?;
        if train.is_empty() {
            return Err(Error::invalid("cannot fit on an empty dataset"));
        }
        let stoplist = self.stoplist.as_ref().map(|s| {
            let mut words: Vec<String> = s.iter().cloned().collect();
            words.sort();
            words
        });
        let preprocess = Preprocessor::new(stoplist.as_deref());
        let corpus = train
            .instances
            .iter()
            .map(|i| preprocess.apply(i))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<Polarity> = corpus.iter().map(|t| t.polarity).collect();
        let vocab = build_vocab(&corpus, 1);
        let aspect_ids = assign_aspect_ids(&corpus);
        let max_len = self.max_len.unwrap_or_else(|| default_max_len(&corpus));
        let tfidf = match self.features {
            FeatureMode::Tfidf => Some(TfIdfModel::fit(&corpus, &vocab)?),
            _ => None,
        };
        let mut fitted = FittedPipeline {
            features: self.features,
            spec: self.model.clone(),
            seed: self.seed,
            stoplist,
            vocab,
            aspect_ids,
            tfidf,
            max_len,
            model: FittedModel::Classic(ClassicModel::Majority(crate::classic::Majority {
                dim: 0,
                class: Polarity::Negative,
            })),
        };
        fitted.model = match &self.model {
            ModelSpec::Classic(h) => {
                let x = corpus
                    .iter()
                    .map(|t| fitted.feature_vector(t))
                    .collect::<Result<Vec<_>>>()?;
                FittedModel::Classic(h.fit(&x, &labels)?)
            }
            ModelSpec::Memnet(tp) => {
                let source = self.embeddings.as_deref().cloned().unwrap_or_default();
                let table = EmbeddingTable::from_source(&source, &fitted.vocab, tp.dim, tp.seed)?;
                let examples: Vec<(MemNetInput, Polarity)> = corpus
                    .iter()
                    .map(|t| (MemNetInput::from_tokenized(t, &fitted.vocab), t.polarity))
                    .collect();
                let (params, history) = memnet::train(&examples, table, tp)?;
                if let Some(last) = history.last() {
                    log::info!("memnet trained {} epochs, final mean loss {last:.6}", history.len());
                }
                FittedModel::Memnet(params)
            }
        };
        Ok(fitted)
    }
}

struct Preprocessor {
    stoplist: Option<HashSet<String>>,
}

impl Preprocessor {
    fn new(words: Option<&[String]>) -> Self {
        Preprocessor {
            stoplist: words.map(|w| w.iter().cloned().collect()),
        }
    }

    fn apply(&self, inst: &Instance) -> Result<TokenizedInstance> {
        let ti = TokenizedInstance::from_instance(inst)?;
        Ok(match &self.stoplist {
            Some(s) => remove_stopwords(&ti, s),
            None => ti,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Classic(ClassicModel),
    Memnet(MemNetParams),
}

/// Everything needed to label a raw instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub features: FeatureMode,
    pub spec: ModelSpec,
    pub seed: u64,
    /// Sorted stop-word list, when removal is enabled.
    pub stoplist: Option<Vec<String>>,
    pub vocab: Vocabulary,
    pub aspect_ids: AspectIdMap,
    pub tfidf: Option<TfIdfModel>,
    pub max_len: usize,
    pub model: FittedModel,
}

impl FittedPipeline {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    pub fn tokenize(&self, inst: &Instance) -> Result<TokenizedInstance> {
        Preprocessor::new(self.stoplist.as_deref()).apply(inst)
    }

    /// Classical feature vector; aspects unseen in training get id 0.
    pub fn feature_vector(&self, ti: &TokenizedInstance) -> Result<FeatureVector> {
        match self.features {
            FeatureMode::Oh => Ok(one_hot_vector(ti, &self.vocab)),
            FeatureMode::Le => {
                let aspect_id = self.aspect_ids.id(&ti.aspect_phrase()).unwrap_or(0);
                location_feature_vector(ti, &self.vocab, aspect_id, self.max_len)
            }
            FeatureMode::Tfidf => Ok(self
                .tfidf
                .as_ref()
                .ok_or_else(|| Error::invalid("tf-idf model missing"))?
                .transform(ti)),
            FeatureMode::Memnet => Err(Error::invalid("memnet mode has no classical feature vector")),
        }
    }

    pub fn predict_tokenized(&self, ti: &TokenizedInstance) -> Result<Polarity> {
        match &self.model {
            FittedModel::Classic(m) => m.predict_one(&self.feature_vector(ti)?),
            FittedModel::Memnet(p) => Ok(memnet::predict_memnet(p, &MemNetInput::from_tokenized(ti, &self.vocab))),
        }
    }

    pub fn predict(&self, inst: &Instance) -> Result<Polarity> {
        self.predict_tokenized(&self.tokenize(inst)?)
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<Polarity>> {
        data.instances.iter().map(|i| self.predict(i)).collect()
    }
}
