//! Sequential versus data-parallel execution of the two hot paths: ranking
//! every candidate of a question set, and one training epoch.
//!
//! Build with `--no-default-features` to compile the parallel mode down to
//! the sequential fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tabrank::nn::{tokenize, Model, ModelConfig, Vocab};
use tabrank::par::Execution;
use tabrank::paraphrase::Lexicon;
use tabrank::synthetic::{SyntheticConfig, SyntheticData};
use tabrank::training::{precision_at_1, train, TrainConfig, TrainingQuestion};

fn questions() -> Vec<TrainingQuestion> {
    SyntheticData::generate(&SyntheticConfig::default())
        .training_questions(&Lexicon::default(), true)
        .0
}

fn model_for(qs: &[TrainingQuestion]) -> Model {
    let mut lists: Vec<Vec<String>> = Vec::new();
    for q in qs {
        lists.push(tokenize(&q.question));
        lists.extend(q.candidates.iter().map(|c| tokenize(&c.paraphrase_text)));
    }
    Model::new(ModelConfig::default(), Vocab::build(lists.iter().map(Vec::as_slice)), 0).unwrap()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ranking(c: &mut Criterion) {
    let qs = questions();
    let model = model_for(&qs);
    let mut group = c.benchmark_group("rank_50_questions");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| black_box(precision_at_1(&model, &qs, mode)))
        });
    }
    group.finish();
}

fn training_epoch(c: &mut Criterion) {
    let qs = questions();
    let mut group = c.benchmark_group("train_one_epoch");
    group.sample_size(10);
    for (name, mode) in MODES {
        let config = TrainConfig {
            max_epochs: 1,
            execution: mode,
            ..TrainConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| black_box(train(&qs, &[], config).unwrap().best_epoch))
        });
    }
    group.finish();
}

criterion_group!(benches, ranking, training_epoch);
criterion_main!(benches);
