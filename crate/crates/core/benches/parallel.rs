//! Rayon with one worker (the sequential schedule) against the default pool.

use absa::eval::run_crossval;
use absa::pipeline::{FeatureMode, ModelKind, PipelineConfig};
use absa::{Dataset, Instance, Polarity};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

const WORDS: [[&str; 4]; 3] = [
    ["awful", "terrible", "lousy", "dreadful"],
    ["average", "ordinary", "typical", "usual"],
    ["great", "superb", "lovely", "fantastic"],
];
const ASPECTS: [&str; 6] = ["pizza", "waiter", "music", "patio", "coffee", "wine"];

fn corpus(n: usize) -> Dataset {
    let instances = (0..n)
        .map(|i| {
            let c = i % 3;
            let a = ASPECTS[(i * 7) % ASPECTS.len()];
            let w = WORDS[c][(i / 3) % 4];
            let text = format!("i thought the {a} was {w} tonight");
            Instance::locate(i as u64, text, a, Polarity::from_index(c)).unwrap()
        })
        .collect();
    Dataset::new("bench", instances)
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("1-thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("default", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn forest_fit(c: &mut Criterion) {
    let data = corpus(300);
    let cfg = PipelineConfig::new(FeatureMode::Tfidf, ModelKind::Rf, 7);
    let mut group = c.benchmark_group("forest_fit");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| cfg.fit(&data).unwrap()))
        });
    }
    group.finish();
}

fn crossval(c: &mut Criterion) {
    let data = corpus(300);
    let cfg = PipelineConfig::new(FeatureMode::Oh, ModelKind::Svm, 7);
    let mut group = c.benchmark_group("crossval_svm");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| run_crossval(&data, &cfg, "svm", 5, 7).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, forest_fit, crossval);
criterion_main!(benches);
