//! Evaluation-harness properties on a written-out synthetic dataset.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabrank::harness::{classify_lf, evaluate, generate_candidates_minimal, load_questions, rank_question, Category, Ranker};
use tabrank::lambda_dcs::{answer_of, parse_lf, LogicalForm};
use tabrank::nn::{tokenize, Model, ModelConfig, Vocab};
use tabrank::par::Execution;
use tabrank::paraphrase::Lexicon;
use tabrank::synthetic::{SyntheticConfig, SyntheticData};
use tabrank::table::{load_examples, values_match, Table};
use tabrank::training::{load_candidate_file, Combiner};

fn small_config() -> ModelConfig {
    ModelConfig {
        word_dim: 8,
        char_dim: 4,
        char_filters: 3,
        sentence_filters: 5,
        sentence_widths: vec![2, 4],
        hidden: 12,
        ..ModelConfig::default()
    }
}

fn model_for(questions: &[tabrank::harness::LoadedQuestion], seed: u64) -> Model {
    let mut lists: Vec<Vec<String>> = Vec::new();
    for q in questions {
        lists.push(tokenize(&q.example.question));
        lists.extend(q.question.candidates.iter().map(|c| tokenize(&c.paraphrase_text)));
    }
    let vocab = Vocab::build(lists.iter().map(Vec::as_slice));
    Model::new(small_config(), vocab, seed).unwrap()
}

fn dataset(dir: &Path) -> Vec<tabrank::harness::LoadedQuestion> {
    let data = SyntheticData::generate(&SyntheticConfig::default());
    data.write_to_dir(dir).unwrap();
    let examples = load_examples(&dir.join("train_examples.tsv")).unwrap();
    let records = load_candidate_file(&dir.join("train_candidates.jsonl")).unwrap();
    load_questions(&examples, &records, &dir.join("tables"), &Lexicon::default(), true).unwrap()
}

#[test]
fn evaluation_is_order_free_and_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let questions = dataset(dir.path());
    let ranker = Ranker::single(model_for(&questions, 3));
    let report = evaluate(&questions, &ranker, Execution::Parallel).unwrap();
    assert_eq!(report.questions, 50);
    assert_eq!(report.coverage, 1.0);

    let mut shuffled = questions.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    let again = evaluate(&shuffled, &ranker, Execution::Sequential).unwrap();
    assert_eq!(report.to_json(), again.to_json());

    // Recount from ranked lists, checking answers against gold directly.
    let mut correct = 0;
    for q in &questions {
        let ranked = rank_question(&q.example.id, &q.example.question, &q.question.candidates, &q.table, &ranker).unwrap();
        let top = parse_lf(&ranked.chosen().unwrap().lf).unwrap();
        let answer = answer_of(&top, &q.table).unwrap();
        let right = !answer.is_empty() && values_match(&answer, &q.example.gold_answer);
        assert_eq!(right, ranked.correct, "{}", q.example.id);
        correct += usize::from(right);
    }
    assert_eq!(report.correct, correct);
    assert_eq!(report.p_at_1, correct as f64 / 50.0);
    let by_cat: usize = report.correct_by_category.values().sum();
    assert_eq!(by_cat, correct);
}

#[test]
fn single_member_ensemble_matches_model() {
    let dir = tempfile::tempdir().unwrap();
    let questions = dataset(dir.path());
    let model = model_for(&questions, 1);
    let single = evaluate(&questions, &Ranker::single(model.clone()), Execution::Parallel).unwrap();
    let mean = Ranker {
        members: vec![model.clone(), model],
        combiner: Combiner::Mean,
    };
    assert_eq!(single, evaluate(&questions, &mean, Execution::Parallel).unwrap());
}

fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let rows = rng.gen_range(1..=6);
    let cols = rng.gen_range(1..=4);
    let header: Vec<String> = (0..cols).map(|c| format!("col {c}")).collect();
    let numeric: Vec<bool> = (0..cols).map(|_| rng.gen_bool(0.5)).collect();
    let body: Vec<Vec<String>> = (0..rows)
        .map(|_| {
            numeric
                .iter()
                .map(|&n| {
                    if n {
                        rng.gen_range(0..100).to_string()
                    } else {
                        ["red", "blue", "green", "gold"][rng.gen_range(0..4)].to_string()
                    }
                })
                .collect()
        })
        .collect();
    Table::from_raw(&header, &body).unwrap()
}

#[test]
fn generated_candidates_parse_and_execute() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let t = random_table(&mut rng);
        let budget = rng.gen_range(1..40);
        let question = "what is the largest col 1 ?";
        let out = generate_candidates_minimal(question, &t, budget).unwrap();
        assert!(!out.is_empty() && out.len() <= budget);
        assert_eq!(out, generate_candidates_minimal(question, &t, budget).unwrap());
        let mut seen = std::collections::BTreeSet::new();
        for s in &out {
            assert!(seen.insert(s.clone()), "duplicate {s}");
            let lf = parse_lf(s).unwrap();
            assert_eq!(&lf.serialize(), s);
            assert!(answer_of(&lf, &t).is_ok(), "{s}");
        }
        // A larger budget extends, never reorders.
        let more = generate_candidates_minimal(question, &t, budget + 10).unwrap();
        assert_eq!(&more[..out.len()], &out[..]);
    }
}

#[test]
fn categories_follow_precedence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let has = |lf: &LogicalForm, f: fn(&LogicalForm) -> bool| lf.any(&f);
    for _ in 0..50 {
        let t = random_table(&mut rng);
        for s in generate_candidates_minimal("q", &t, 200).unwrap() {
            let lf = parse_lf(&s).unwrap();
            let sup = has(&lf, |z| matches!(z, LogicalForm::Superlative { .. }));
            let arith = has(&lf, |z| matches!(z, LogicalForm::Arithmetic { .. } | LogicalForm::Comparison { .. }));
            let expected = if sup {
                Category::Superlatives
            } else if arith {
                Category::ArithmeticComparisons
            } else if has(&lf, |z| {
                matches!(z, LogicalForm::Aggregation { .. } | LogicalForm::Relation(tabrank::lambda_dcs::RelationName::Next))
            }) {
                Category::AggregationNextPrev
            } else {
                Category::Lookup
            };
            assert_eq!(classify_lf(&lf), expected, "{s}");
        }
    }
}
