use absa::classic::N_CLASSES;
use absa::encode::{location_encode, FeatureVector, TfIdfModel};
use absa::eval::{compute_metrics, stratified_kfold};
use absa::memnet::{forward, location_weights, random_gradcheck_case, MemNetInput};
use absa::persist;
use absa::pipeline::{FeatureMode, ModelKind, PipelineConfig};
use absa::textproc::{build_vocab, TokenizedInstance};
use absa::{Dataset, Instance, Polarity};
use proptest::prelude::*;

fn polarity() -> impl Strategy<Value = Polarity> {
    (0usize..3).prop_map(Polarity::from_index)
}

fn memnet_case() -> impl Strategy<Value = (usize, usize, usize, bool, u64)> {
    (1usize..10, 0usize..8, 1usize..4, any::<bool>(), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmaxes_sum_to_one((d, m, k, tr, seed) in memnet_case()) {
        let (p, input, _) = random_gradcheck_case(d, m, k, tr, seed);
        let t = forward(&p, &input);
        prop_assert!((t.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.probabilities.iter().all(|&v| v > 0.0));
        for a in t.attention.iter().filter(|a| !a.is_empty()) {
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(a.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn padding_never_participates((d, m, k, tr, seed) in memnet_case(), extra in 1usize..4, at in any::<prop::sample::Index>()) {
        let (p, input, _) = random_gradcheck_case(d, m, k, tr, seed);
        let mut padded: MemNetInput = input.clone();
        for _ in 0..extra {
            let i = at.index(padded.context.len() + 1);
            padded.context.insert(i, 0);
            padded.locations.insert(i, 1);
        }
        prop_assert_eq!(forward(&p, &input).probabilities, forward(&p, &padded).probabilities);
    }

    #[test]
    fn location_weights_in_unit_interval_and_decreasing(n in 2usize..60) {
        let l: Vec<u32> = (1..n as u32).collect();
        let v = location_weights(&l, n).unwrap();
        prop_assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
        prop_assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn location_sequence_reverses_with_sentence(len in 1usize..12, s in 0usize..12, w in 1usize..4) {
        prop_assume!(s + w <= len);
        let words: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
        let ti = TokenizedInstance::new(words.clone(), (s, s + w), Polarity::Neutral);
        let rev: Vec<String> = words.into_iter().rev().collect();
        let tr = TokenizedInstance::new(rev, (len - s - w, len - s), Polarity::Neutral);
        let mut a = location_encode(&ti);
        a.reverse();
        prop_assert_eq!(a, location_encode(&tr));
    }

    #[test]
    fn kfold_partitions_exactly(labels in prop::collection::vec(polarity(), 6..150), k in 2usize..6, seed in any::<u64>()) {
        let mut counts = [0usize; N_CLASSES];
        labels.iter().for_each(|l| counts[l.index()] += 1);
        match stratified_kfold(&labels, k, seed) {
            Err(_) => prop_assert!(counts.iter().any(|&c| c < k)),
            Ok(plan) => {
                let mut all: Vec<usize> = plan.folds.concat();
                all.sort_unstable();
                prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
                for c in 0..N_CLASSES {
                    let per: Vec<usize> = plan.folds.iter().map(|f| f.iter().filter(|&&i| labels[i].index() == c).count()).collect();
                    prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
                }
            }
        }
    }

    #[test]
    fn confusion_margins_match_counts(pairs in prop::collection::vec((polarity(), polarity()), 1..80)) {
        let (gold, pred): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let m = compute_metrics(&gold, &pred).unwrap();
        for c in 0..N_CLASSES {
            let row: u64 = m.confusion[c].iter().sum();
            let col: u64 = m.confusion.iter().map(|r| r[c]).sum();
            prop_assert_eq!(row as usize, gold.iter().filter(|g| g.index() == c).count());
            prop_assert_eq!(col as usize, pred.iter().filter(|p| p.index() == c).count());
            let cm = m.per_class[c];
            for v in [cm.precision, cm.recall, cm.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let trace: u64 = (0..N_CLASSES).map(|c| m.confusion[c][c]).sum();
        prop_assert_eq!(m.accuracy, trace as f64 / gold.len() as f64);
    }

    #[test]
    fn tfidf_rows_have_unit_or_zero_norm(docs in prop::collection::vec(prop::collection::vec(0usize..6, 1..8), 1..10), probe in prop::collection::vec(0usize..9, 1..8)) {
        let word = |i: &usize| format!("t{i}");
        let corpus: Vec<TokenizedInstance> = docs
            .iter()
            .map(|d| TokenizedInstance::new(d.iter().map(word).collect(), (0, 1), Polarity::Neutral))
            .collect();
        let vocab = build_vocab(&corpus, 1);
        let model = TfIdfModel::fit(&corpus, &vocab).unwrap();
        prop_assert!(model.idf().iter().all(|&v| v >= 1.0));
        let ti = TokenizedInstance::new(probe.iter().map(word).collect(), (0, 1), Polarity::Neutral);
        let v: FeatureVector = model.transform(&ti);
        let norm = v.l2_norm();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn archives_predict_identically(seed in any::<u64>(), kind in prop::sample::select(vec![ModelKind::Nb, ModelKind::Dtree, ModelKind::Svm, ModelKind::Gbt])) {
        let words = ["good", "bad", "fine", "meh", "wow", "ugh"];
        let mut rng_state = seed;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 33) as usize
        };
        let instances: Vec<Instance> = (0..30)
            .map(|i| {
                let w = words[next() % words.len()];
                let label = Polarity::from_index(i % 3);
                Instance::locate(i as u64, format!("the soup was {w}"), "soup", label).unwrap()
            })
            .collect();
        let data = Dataset::new("prop", instances);
        let mut cfg = PipelineConfig::new(FeatureMode::Tfidf, kind, seed);
        if let absa::pipeline::ModelSpec::Classic(absa::classic::Hyperparams::GradientBoosting(b)) = &mut cfg.model {
            b.n_rounds = 5;
        }
        let fitted = cfg.fit(&data).unwrap();
        let loaded = persist::from_bytes(&persist::to_bytes(&fitted)).unwrap();
        prop_assert_eq!(fitted.predict_dataset(&data).unwrap(), loaded.predict_dataset(&data).unwrap());
    }
}
