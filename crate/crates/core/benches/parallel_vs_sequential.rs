use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wdaug_core::augment::eda::{EdaAugmenter, EdaParams, SynonymLexicon};
use wdaug_core::balance::{apply_plan, BalancePlan};
use wdaug_core::classify::train;
use wdaug_core::corpus::stratified_split;
use wdaug_core::par;
use wdaug_core::similarity::report::pairs_from_corpus;
use wdaug_core::similarity::{similarity_report, BuiltinEmbedder, EmbeddingProvider, RuleTagger};
use wdaug_core::synth;

fn run<R>(mode: &str, f: impl FnOnce() -> R) -> R {
    if mode == "sequential" {
        par::sequential(f)
    } else {
        f()
    }
}

const MODES: [&str; 2] = ["parallel", "sequential"];

fn benches(c: &mut Criterion) {
    let corpus = synth::bundled();
    let plan = BalancePlan::with_test_size(&corpus.class_counts(), 25).unwrap();
    let (train_set, test) = stratified_split(&corpus, 25, 1).unwrap();
    let eda = EdaAugmenter::new(EdaParams::default(), SynonymLexicon::starter());
    let balanced = apply_plan(&train_set, &plan, &eda, 1).unwrap();

    let mut g = c.benchmark_group("augment_eda");
    for mode in MODES {
        g.bench_function(BenchmarkId::from_parameter(mode), |b| {
            b.iter(|| run(mode, || apply_plan(black_box(&train_set), &plan, &eda, 7).unwrap()))
        });
    }
    g.finish();

    let pairs = pairs_from_corpus(&balanced, None).unwrap();
    let providers: [&dyn EmbeddingProvider; 1] = [&BuiltinEmbedder];
    let mut g = c.benchmark_group("similarity_report");
    g.sample_size(20);
    for mode in MODES {
        g.bench_function(BenchmarkId::from_parameter(mode), |b| {
            b.iter(|| run(mode, || similarity_report(black_box(&pairs), &providers, &RuleTagger).unwrap()))
        });
    }
    g.finish();

    let model = train(&balanced, 1.0).unwrap();
    let texts: Vec<&str> = test.iter().chain(balanced.iter()).map(|d| d.text.as_str()).collect();
    let mut g = c.benchmark_group("predict_batch");
    for mode in MODES {
        g.bench_function(BenchmarkId::from_parameter(mode), |b| {
            b.iter(|| run(mode, || model.predict_batch(black_box(&texts))))
        });
    }
    g.finish();
}

criterion_group!(parallel_vs_sequential, benches);
criterion_main!(parallel_vs_sequential);
