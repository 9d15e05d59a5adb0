use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::nn::{load_word_vectors, tokenize, Model, ModelParams, ScoreGraph, Vocab};
use crate::par;

use super::adam::{adam_step, OptimizerState};
use super::{Pairing, TrainConfig, TrainError, TrainingQuestion};

/// Pairs whose gradients are accumulated by one work item. Fixed so that the
/// summation order does not depend on the thread count.
const PAIR_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean hinge loss per sampled pair.
    pub train_loss: f64,
    pub val_p_at_1: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub model: Model,
    pub log: Vec<EpochLog>,
    /// 1-based.
    pub best_epoch: usize,
    pub word_vector_hits: Option<usize>,
}

/// Index of the highest score; ties go to the earliest entry.
pub fn top_index(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

struct Prepared {
    question: Vec<String>,
    texts: Vec<Vec<String>>,
    labels: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    pos_q: usize,
    pos: usize,
    neg_q: usize,
    neg: usize,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5eed, |acc, &p| splitmix(acc ^ splitmix(p)))
}

fn prepare(questions: &[TrainingQuestion]) -> Vec<Prepared> {
    questions
        .iter()
        .map(|q| Prepared {
            question: tokenize(&q.question),
            texts: q.candidates.iter().map(|c| tokenize(&c.paraphrase_text)).collect(),
            labels: q.candidates.iter().map(|c| c.label).collect(),
        })
        .collect()
}

fn sample_pairs(data: &[Prepared], config: &TrainConfig, rng: &mut ChaCha8Rng) -> Vec<Pair> {
    let cap = config.pairs_per_question;
    let mut pairs = Vec::new();
    match config.pairing {
        Pairing::PerQuestion => {
            for (qi, q) in data.iter().enumerate() {
                let pos: Vec<usize> = (0..q.labels.len()).filter(|&i| q.labels[i]).collect();
                let neg: Vec<usize> = (0..q.labels.len()).filter(|&i| !q.labels[i]).collect();
                let total = pos.len() * neg.len();
                let make = |k: usize| Pair {
                    pos_q: qi,
                    pos: pos[k / neg.len()],
                    neg_q: qi,
                    neg: neg[k % neg.len()],
                };
                if total <= cap {
                    pairs.extend((0..total).map(make));
                } else {
                    pairs.extend(index::sample(rng, total, cap).into_iter().map(make));
                }
            }
        }
        Pairing::Global => {
            let collect = |want: bool| -> Vec<(usize, usize)> {
                data.iter()
                    .enumerate()
                    .flat_map(|(qi, q)| (0..q.labels.len()).filter(move |&i| q.labels[i] == want).map(move |i| (qi, i)))
                    .collect()
            };
            let (pos, neg) = (collect(true), collect(false));
            let total = pos.len() * neg.len();
            let budget = cap * data.len();
            let make = |k: usize| {
                let (pq, p) = pos[k / neg.len()];
                let (nq, n) = neg[k % neg.len()];
                Pair {
                    pos_q: pq,
                    pos: p,
                    neg_q: nq,
                    neg: n,
                }
            };
            if total <= budget {
                pairs.extend((0..total).map(make));
            } else {
                pairs.extend(index::sample(rng, total, budget).into_iter().map(make));
            }
        }
    }
    pairs.shuffle(rng);
    pairs
}

/// Hinge loss and parameter gradients summed over a run of pairs. A
/// non-finite score makes the loss NaN.
fn chunk_gradient(model: &Model, data: &[Prepared], pairs: &[(usize, Pair)], theta: f64, dropout: bool, seed: u64) -> (ModelParams, f64) {
    let mut grads = model.params.zeros_like();
    let mut loss = 0.0;
    for &(id, p) in pairs {
        let drop = |k: u64| dropout.then(|| derive_seed(&[seed, id as u64, k]));
        if p.pos_q == p.neg_q {
            let mut g = ScoreGraph::new(model, &data[p.pos_q].question);
            let sp = g.score(&data[p.pos_q].texts[p.pos], drop(0));
            let sn = g.score(&data[p.neg_q].texts[p.neg], drop(1));
            let m = theta - sp + sn;
            if !m.is_finite() {
                loss = f64::NAN;
            } else if m > 0.0 {
                loss += m;
                g.backward(&[-1.0, 1.0], &mut grads);
            }
        } else {
            let mut gp = ScoreGraph::new(model, &data[p.pos_q].question);
            let mut gn = ScoreGraph::new(model, &data[p.neg_q].question);
            let sp = gp.score(&data[p.pos_q].texts[p.pos], drop(0));
            let sn = gn.score(&data[p.neg_q].texts[p.neg], drop(1));
            let m = theta - sp + sn;
            if !m.is_finite() {
                loss = f64::NAN;
            } else if m > 0.0 {
                loss += m;
                gp.backward(&[-1.0], &mut grads);
                gn.backward(&[1.0], &mut grads);
            }
        }
    }
    (grads, loss)
}

/// Fraction of questions whose top-scored candidate is labelled correct;
/// 0 for an empty set.
pub fn precision_at_1(model: &Model, questions: &[TrainingQuestion], execution: par::Execution) -> f64 {
    if questions.is_empty() {
        return 0.0;
    }
    let correct = par::map(execution, questions, |q| {
        let texts: Vec<String> = q.candidates.iter().map(|c| c.paraphrase_text.clone()).collect();
        let scores = model.score_candidates(&q.question, &texts);
        top_index(&scores).is_some_and(|i| q.candidates[i].label)
    });
    correct.iter().filter(|&&c| c).count() as f64 / questions.len() as f64
}

/// Trains one model. Validation P@1 after each epoch drives early stopping
/// and model selection; an empty validation set falls back to the training
/// questions.
pub fn train(
    train_set: &[TrainingQuestion],
    val_set: &[TrainingQuestion],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let usable = match config.pairing {
        Pairing::PerQuestion => train_set.iter().any(|q| q.has_positive() && q.has_negative()),
        Pairing::Global => train_set.iter().any(|q| q.has_positive()) && train_set.iter().any(|q| q.has_negative()),
    };
    if !usable {
        return Err(TrainError::NoTrainablePairs);
    }
    let data = prepare(train_set);
    let vocab = Vocab::build(data.iter().flat_map(|d| std::iter::once(d.question.as_slice()).chain(d.texts.iter().map(Vec::as_slice))));
    let model_config = config.effective_model_config();
    let dropout = model_config.keep_prob < 1.0;
    let mut model = Model::new(model_config, vocab, config.seed)?;
    let word_vector_hits = match (&config.word_vectors, config.ablations.no_glove) {
        (Some(path), false) => Some(load_word_vectors(path, &mut model)?),
        _ => None,
    };
    let val = if val_set.is_empty() { train_set } else { val_set };
    let mut state = OptimizerState::new(&model.params);
    let mut log = Vec::new();
    let mut best: Option<(f64, f64, usize, ModelParams)> = None;
    let mut since_best = 0;
    for epoch in 1..=config.max_epochs {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, epoch as u64]));
        let pairs = sample_pairs(&data, config, &mut rng);
        let mut loss_sum = 0.0;
        let mut next_id = 0usize;
        for batch in pairs.chunks(config.batch_size) {
            let tagged: Vec<(usize, Pair)> = batch.iter().enumerate().map(|(i, &p)| (next_id + i, p)).collect();
            next_id += batch.len();
            let chunks: Vec<&[(usize, Pair)]> = tagged.chunks(PAIR_CHUNK).collect();
            let epoch_seed = derive_seed(&[config.seed, epoch as u64, 1]);
            let parts = par::map(config.execution, &chunks, |c| {
                chunk_gradient(&model, &data, c, config.theta, dropout, epoch_seed)
            });
            let mut grads = model.params.zeros_like();
            let mut batch_loss = 0.0;
            for (g, l) in &parts {
                grads.add_assign(g);
                batch_loss += l;
            }
            if !batch_loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { step: state.step + 1 });
            }
            loss_sum += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut model.params, &grads, &mut state, config)?;
        }
        let train_loss = if pairs.is_empty() { 0.0 } else { loss_sum / pairs.len() as f64 };
        let val_p_at_1 = precision_at_1(&model, val, config.execution);
        let entry = EpochLog {
            epoch,
            train_loss,
            val_p_at_1,
            seconds: start.elapsed().as_secs_f64(),
        };
        log::info!("epoch {epoch}: loss {train_loss:.4}, val P@1 {val_p_at_1:.4}");
        log.push(entry);
        let improved = best
            .as_ref()
            .is_none_or(|(p, l, _, _)| val_p_at_1 > *p || (val_p_at_1 == *p && train_loss < *l));
        if improved {
            best = Some((val_p_at_1, train_loss, epoch, model.params.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= config.patience {
            break;
        }
    }
    let (_, _, best_epoch, params) = best.expect("at least one epoch ran");
    model.params = params;
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
        word_vector_hits,
    })
}
