//! Ranking, evaluation and question-type analysis over candidate files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::lambda_dcs::{answer_of, build, parse_lf, AggregateOp, ComparisonOp, LogicalForm, RelationName, SuperlativeOp};
use crate::nn::{tokenize, Model};
use crate::par::{self, Execution};
use crate::paraphrase::{paraphrase, Lexicon};
use crate::table::{load_table, CellValue, QAExample, Table, TableError, TableFormat, ValueKind};
use crate::training::{build_candidates, ensemble_scores, Candidate, CandidateRecord, Combiner, TrainError, TrainingQuestion};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("examples and candidates disagree: {0}")]
    IdMismatch(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("candidate budget must be positive")]
    ZeroBudget,
}

/// Question types used to break down correct answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Lookup,
    AggregationNextPrev,
    Superlatives,
    ArithmeticComparisons,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Lookup,
        Category::AggregationNextPrev,
        Category::Superlatives,
        Category::ArithmeticComparisons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Lookup => "lookup",
            Category::AggregationNextPrev => "aggregation_next_prev",
            Category::Superlatives => "superlatives",
            Category::ArithmeticComparisons => "arithmetic_comparisons",
        }
    }
}

/// Superlative beats arithmetic/comparison, which beats aggregation/next,
/// which beats plain lookup.
pub fn classify_lf(lf: &LogicalForm) -> Category {
    if lf.any(&|z| matches!(z, LogicalForm::Superlative { .. })) {
        Category::Superlatives
    } else if lf.any(&|z| matches!(z, LogicalForm::Arithmetic { .. } | LogicalForm::Comparison { .. })) {
        Category::ArithmeticComparisons
    } else if lf.any(&|z| {
        matches!(z, LogicalForm::Aggregation { .. } | LogicalForm::Relation(RelationName::Next))
    }) {
        Category::AggregationNextPrev
    } else {
        Category::Lookup
    }
}

/// One model or several whose scores are combined.
#[derive(Debug, Clone)]
pub struct Ranker {
    pub members: Vec<Model>,
    pub combiner: Combiner,
}

impl Ranker {
    pub fn single(model: Model) -> Ranker {
        Ranker {
            members: vec![model],
            combiner: Combiner::Mean,
        }
    }

    /// Whether members read paraphrases (as opposed to raw logical forms).
    pub fn paraphrase_input(&self) -> bool {
        self.members.first().is_none_or(|m| m.config().paraphrase_input)
    }

    pub fn scores(&self, question: &str, texts: &[String]) -> Result<Vec<f64>, HarnessError> {
        if let [only] = self.members.as_slice() {
            return Ok(only.score_candidates(question, texts));
        }
        Ok(ensemble_scores(&self.members, question, texts, self.combiner)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub source_index: usize,
    pub score: f64,
    pub lf: String,
    pub paraphrase: String,
    pub label: bool,
}

/// Candidates by descending score; equal scores keep the lower source index
/// first. The chosen candidate is the first entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub question_id: String,
    pub entries: Vec<RankedEntry>,
    pub answer: Vec<String>,
    pub correct: bool,
}

impl RankedList {
    pub fn chosen(&self) -> Option<&RankedEntry> {
        self.entries.first()
    }
}

/// Orders candidates by the given scores.
pub fn rank_scored(question_id: &str, candidates: &[Candidate], scores: &[f64], table: &Table) -> RankedList {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(candidates[a].source_index.cmp(&candidates[b].source_index))
    });
    let entries: Vec<RankedEntry> = order
        .iter()
        .map(|&i| RankedEntry {
            source_index: candidates[i].source_index,
            score: scores[i],
            lf: candidates[i].lf.serialize(),
            paraphrase: candidates[i].paraphrase_text.clone(),
            label: candidates[i].label,
        })
        .collect();
    let (answer, correct) = match order.first() {
        Some(&top) => (
            answer_of(&candidates[top].lf, table)
                .map(|vals| vals.iter().map(|v| v.to_string()).collect())
                .unwrap_or_default(),
            candidates[top].label,
        ),
        None => (Vec::new(), false),
    };
    RankedList {
        question_id: question_id.to_string(),
        entries,
        answer,
        correct,
    }
}

pub fn rank_question(
    question_id: &str,
    question: &str,
    candidates: &[Candidate],
    table: &Table,
    ranker: &Ranker,
) -> Result<RankedList, HarnessError> {
    let texts: Vec<String> = candidates.iter().map(|c| c.paraphrase_text.clone()).collect();
    let scores = ranker.scores(question, &texts)?;
    Ok(rank_scored(question_id, candidates, &scores, table))
}

/// A question joined with its table and labelled candidates.
#[derive(Debug, Clone)]
pub struct LoadedQuestion {
    pub example: QAExample,
    pub table: Arc<Table>,
    pub question: TrainingQuestion,
    /// Candidates listed in the file, including dropped ones.
    pub listed: usize,
}

fn resolve_table(tables_dir: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        tables_dir.join(p)
    }
}

/// Joins examples with candidate records by id, loads each referenced table
/// once, and labels every candidate. Ids present on only one side are an
/// error that lists them.
pub fn load_questions(
    examples: &[QAExample],
    records: &[CandidateRecord],
    tables_dir: &Path,
    lexicon: &Lexicon,
    paraphrase_input: bool,
) -> Result<Vec<LoadedQuestion>, HarnessError> {
    let by_id: BTreeMap<&str, &CandidateRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let example_ids: BTreeSet<&str> = examples.iter().map(|e| e.id.as_str()).collect();
    let missing: Vec<&str> = example_ids.iter().copied().filter(|id| !by_id.contains_key(id)).collect();
    let unknown: Vec<&str> = by_id.keys().copied().filter(|id| !example_ids.contains(id)).collect();
    if !missing.is_empty() || !unknown.is_empty() {
        return Err(HarnessError::IdMismatch(format!(
            "no candidates for [{}]; candidates without an example [{}]",
            missing.join(", "),
            unknown.join(", ")
        )));
    }
    let mut tables: BTreeMap<PathBuf, Arc<Table>> = BTreeMap::new();
    let mut out = Vec::with_capacity(examples.len());
    for e in examples {
        let record = by_id[e.id.as_str()];
        let name = if record.table.is_empty() { &e.table_ref } else { &record.table };
        let path = resolve_table(tables_dir, name);
        let table = match tables.get(&path) {
            Some(t) => t.clone(),
            None => {
                let t = Arc::new(load_table(&path, TableFormat::from_path(&path))?);
                tables.insert(path, t.clone());
                t
            }
        };
        let set = build_candidates(e, &record.candidates, &table, lexicon, paraphrase_input);
        out.push(LoadedQuestion {
            example: e.clone(),
            table,
            question: TrainingQuestion {
                id: e.id.clone(),
                question: e.question.clone(),
                candidates: set.candidates,
            },
            listed: record.candidates.len(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionResult {
    pub id: String,
    pub correct: bool,
    pub has_positive: bool,
    pub candidates: usize,
    pub chosen_lf: Option<String>,
    pub chosen_paraphrase: Option<String>,
    pub category: Option<Category>,
    pub answer: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub questions: usize,
    pub correct: usize,
    pub p_at_1: f64,
    /// Fraction of questions with at least one positive candidate.
    pub coverage: f64,
    /// Correct answers by the category of the chosen logical form.
    pub correct_by_category: BTreeMap<Category, usize>,
    /// Sorted by id.
    pub results: Vec<QuestionResult>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Ranks every question and aggregates. Questions without usable
/// candidates count as wrong.
pub fn evaluate(questions: &[LoadedQuestion], ranker: &Ranker, execution: Execution) -> Result<EvalReport, HarnessError> {
    let ranked = par::map(execution, questions, |q| {
        rank_question(&q.example.id, &q.example.question, &q.question.candidates, &q.table, ranker)
    });
    let mut results = Vec::with_capacity(questions.len());
    for (q, r) in questions.iter().zip(ranked) {
        let r = r?;
        let chosen = r.chosen();
        let category = chosen.map(|c| classify_lf(&parse_lf(&c.lf).expect("serialized forms parse")));
        results.push(QuestionResult {
            id: q.example.id.clone(),
            correct: r.correct,
            has_positive: q.question.has_positive(),
            candidates: q.question.candidates.len(),
            chosen_lf: chosen.map(|c| c.lf.clone()),
            chosen_paraphrase: chosen.map(|c| c.paraphrase.clone()),
            category,
            answer: r.answer.clone(),
        });
    }
    Ok(report_from_results(results))
}

/// Aggregates per-question results; the order of `results` is irrelevant.
pub fn report_from_results(mut results: Vec<QuestionResult>) -> EvalReport {
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let n = results.len();
    let correct = results.iter().filter(|r| r.correct).count();
    let covered = results.iter().filter(|r| r.has_positive).count();
    let mut by_cat: BTreeMap<Category, usize> = Category::ALL.iter().map(|&c| (c, 0)).collect();
    for r in results.iter().filter(|r| r.correct) {
        if let Some(c) = r.category {
            *by_cat.get_mut(&c).unwrap() += 1;
        }
    }
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    EvalReport {
        questions: n,
        correct,
        p_at_1: frac(correct),
        coverage: frac(covered),
        correct_by_category: by_cat,
        results,
    }
}

/// Template candidates for a question: row counts, cell lookups and counts,
/// first/last row, superlatives and aggregates over numeric columns,
/// comparisons, and next/previous row hops. Every form is checked to
/// execute on `table`; the pool is ordered by word overlap between its
/// paraphrase and the question (ties keep generation order) and cut to
/// `budget`.
pub fn generate_candidates_minimal(question: &str, table: &Table, budget: usize) -> Result<Vec<String>, HarnessError> {
    use build::*;
    if budget == 0 {
        return Err(HarnessError::ZeroBudget);
    }
    let cols = table.column_names();
    let mut pool: Vec<LogicalForm> = vec![agg(AggregateOp::Count, LogicalForm::AllRows)];
    let distinct = |c: usize| -> Vec<CellValue> {
        let set: BTreeSet<CellValue> = table.column(c).cloned().collect();
        set.into_iter().collect()
    };
    let numeric: Vec<usize> = (0..cols.len())
        .filter(|&c| table.row_count() > 0 && table.column(c).all(|v| v.kind() == ValueKind::Number))
        .collect();
    for (c, name) in cols.iter().enumerate() {
        let col = || column(name);
        for op in [SuperlativeOp::Argmax, SuperlativeOp::Argmin] {
            pool.push(join(reverse(col()), sup(op, LogicalForm::AllRows, rel(RelationName::Index))));
        }
        for v in distinct(c) {
            pool.push(agg(AggregateOp::Count, join(col(), value(v.clone()))));
            for (c2, other) in cols.iter().enumerate() {
                if c2 != c {
                    pool.push(join(reverse(column(other)), join(col(), value(v.clone()))));
                    pool.push(join(reverse(column(other)), join(rel(RelationName::Next), join(col(), value(v.clone())))));
                    pool.push(join(
                        reverse(column(other)),
                        join(reverse(rel(RelationName::Next)), join(col(), value(v.clone()))),
                    ));
                }
            }
        }
    }
    for &c in &numeric {
        let name = &cols[c];
        for op in [AggregateOp::Max, AggregateOp::Min, AggregateOp::Sum, AggregateOp::Avg] {
            pool.push(agg(op, join(reverse(column(name)), LogicalForm::AllRows)));
        }
        for (c2, other) in cols.iter().enumerate() {
            if c2 != c {
                for op in [SuperlativeOp::Argmax, SuperlativeOp::Argmin] {
                    pool.push(join(reverse(column(other)), sup(op, LogicalForm::AllRows, column(name))));
                }
            }
        }
        for v in distinct(c) {
            for op in [ComparisonOp::Gt, ComparisonOp::Lt] {
                pool.push(agg(AggregateOp::Count, join(column(name), cmp(op, v.clone()))));
            }
        }
    }
    let q: BTreeSet<String> = tokenize(question).into_iter().collect();
    let lexicon = Lexicon::default();
    let mut seen = BTreeSet::new();
    let mut scored: Vec<(usize, String)> = Vec::new();
    for lf in pool {
        let text = lf.serialize();
        if !seen.insert(text.clone()) {
            continue;
        }
        let runs = parse_lf(&text).is_ok_and(|back| back == lf) && answer_of(&lf, table).is_ok_and(|a| !a.is_empty());
        if !runs {
            continue;
        }
        let overlap = paraphrase(&lf, &lexicon)
            .map(|p| tokenize(&p).into_iter().filter(|t| q.contains(t)).collect::<BTreeSet<_>>().len())
            .unwrap_or(0);
        scored.push((overlap, text));
    }
    // Stable sort keeps generation order within equal overlap.
    scored.sort_by_key(|a| std::cmp::Reverse(a.0));
    Ok(scored.into_iter().take(budget).map(|(_, t)| t).collect())
}
