mod common;

use std::sync::Mutex;

use absa::encode::TfIdfModel;
use absa::eval::{run_crossval, Learner};
use absa::pipeline::{FeatureMode, ModelKind, PipelineConfig};
use absa::textproc::{build_vocab, TokenizedInstance};
use absa::{Dataset, Instance, Polarity, Result};

#[test]
fn majority_baseline_scores_majority_fraction() {
    let data = common::single_aspect_corpus(90, [0.5, 0.2, 0.3], 21);
    let mut counts = [0usize; 3];
    data.labels().iter().for_each(|l| counts[l.index()] += 1);
    let majority = *counts.iter().max().unwrap() as f64 / data.len() as f64;
    let cfg = PipelineConfig::new(FeatureMode::Oh, ModelKind::Majority, 1);
    let report = run_crossval(&data, &cfg, "majority", 5, 1).unwrap();
    assert!(
        (report.pooled.accuracy - majority).abs() < 1e-12,
        "{} vs {majority}",
        report.pooled.accuracy
    );
}

#[test]
fn reports_are_byte_identical_under_a_seed() {
    let data = common::single_aspect_corpus(60, [1.0, 1.0, 1.0], 22);
    let cfg = PipelineConfig::new(FeatureMode::Tfidf, ModelKind::Rf, 5);
    let a = run_crossval(&data, &cfg, "rf", 3, 9).unwrap();
    let b = run_crossval(&data, &cfg, "rf", 3, 9).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_text(), b.to_text());
}

/// Training ids, vocabulary tokens and idf of one fitted fold.
type FoldFit = (Vec<u64>, Vec<String>, Vec<f64>);

/// Records the vectorizer each fold fits.
struct IdfProbe {
    seen: Mutex<Vec<FoldFit>>,
}

impl Learner for IdfProbe {
    fn fit_predict(&self, train: &Dataset, test: &Dataset) -> Result<Vec<Polarity>> {
        let corpus: Vec<TokenizedInstance> = train
            .instances
            .iter()
            .map(TokenizedInstance::from_instance)
            .collect::<Result<_>>()?;
        let vocab = build_vocab(&corpus, 1);
        let tfidf = TfIdfModel::fit(&corpus, &vocab)?;
        let ids = train.instances.iter().map(|i| i.id).collect();
        self.seen
            .lock()
            .unwrap()
            .push((ids, vocab.tokens().to_vec(), tfidf.idf().to_vec()));
        Ok(vec![Polarity::Neutral; test.len()])
    }
}

#[test]
fn test_fold_tokens_never_reach_fitted_idf() {
    let data = common::single_aspect_corpus(45, [1.0, 1.0, 1.0], 23);
    let run = |d: &Dataset| {
        let probe = IdfProbe {
            seen: Mutex::new(Vec::new()),
        };
        run_crossval(d, &probe, "probe", 3, 4).unwrap();
        let mut v = probe.seen.into_inner().unwrap();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    let base = run(&data);

    // append a vocabulary-unique token to one sentence; whichever fold holds
    // it as test data must fit exactly the same idf as before
    let mut marked = data.clone();
    let target = 7;
    let inst = &marked.instances[target];
    marked.instances[target] = Instance::new(
        inst.id,
        format!("{} zzyzx", inst.text),
        inst.aspect_term.clone(),
        inst.aspect_char_span,
        inst.polarity,
    )
    .unwrap();
    let probed = run(&marked);
    for (before, after) in base.iter().zip(&probed) {
        assert_eq!(before.0, after.0);
        if !after.0.contains(&(target as u64)) {
            assert_eq!(before.1, after.1);
            assert_eq!(before.2, after.2);
            assert!(!after.1.iter().any(|t| t == "zzyzx"));
        }
    }
}

#[test]
fn svm_beats_chance_on_separable_data() {
    let data = common::single_aspect_corpus(120, [1.0, 1.0, 1.0], 24);
    let cfg = PipelineConfig::new(FeatureMode::Oh, ModelKind::Svm, 42);
    let r = run_crossval(&data, &cfg, "svm", 4, 42).unwrap();
    assert!(r.pooled.accuracy > 0.9, "{}", r.pooled.accuracy);
    assert_eq!(r.pooled.total(), 120);
}

#[test]
fn location_features_reject_truncated_aspects() {
    let mut data = common::single_aspect_corpus(30, [1.0, 1.0, 1.0], 25);
    let cfg = {
        let mut c = PipelineConfig::new(FeatureMode::Le, ModelKind::Dtree, 1);
        c.max_len = Some(2);
        c
    };
    data.instances[0] = Instance::locate(0, "i thought it was great , the pizza", "pizza", Polarity::Positive).unwrap();
    assert!(cfg.fit(&data).is_err());
}
