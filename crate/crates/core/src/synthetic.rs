//! Seeded synthetic question sets whose positive candidate is the only one
//! sharing a content word with the question, so a keyword-overlap ranker
//! scores 1.0.
//!
//! Questions come in groups. A group picks cells of one table with pairwise
//! distinct players and attributes, asks one question per cell, and gives
//! every question of the group the same candidates: one lookup per cell.
//! Each candidate text is therefore positive exactly once, so nothing about
//! a paraphrase alone predicts its label.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nn::tokenize;
use crate::paraphrase::Lexicon;
use crate::table::{normalize_value, QAExample, Table};
use crate::training::{build_candidates, CandidateRecord, TrainingQuestion};

const ATTRIBUTES: [&str; 8] = ["team", "city", "position", "school", "coach", "league", "nation", "club"];
const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub tables: usize,
    pub players_per_table: usize,
    pub attributes_per_table: usize,
    /// Cells per group, which is also the number of candidates per question.
    pub group_size: usize,
    pub train_groups: usize,
    pub val_groups: usize,
    /// Also phrase questions as "which {attribute} does {player} have ?".
    pub second_template: bool,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            tables: 4,
            players_per_table: 6,
            attributes_per_table: 6,
            group_size: 5,
            train_groups: 10,
            val_groups: 4,
            second_template: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTable {
    /// File name relative to the tables directory.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SyntheticTable {
    pub fn table(&self) -> Table {
        Table::from_raw(&self.header, &self.rows).expect("synthetic tables are rectangular")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticQuestion {
    pub example: QAExample,
    pub table_index: usize,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub tables: Vec<SyntheticTable>,
    pub train: Vec<SyntheticQuestion>,
    /// Further groups from the same generator. No validation question repeats
    /// a training question verbatim.
    pub val: Vec<SyntheticQuestion>,
}

fn fresh_word(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>) -> String {
    loop {
        let w: String = (0..3)
            .flat_map(|_| {
                [
                    CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char,
                    VOWELS[rng.gen_range(0..VOWELS.len())] as char,
                ]
            })
            .collect();
        if used.insert(w.clone()) {
            return w;
        }
    }
}

/// `(player, attribute, first template)` per cell of a group.
type Group = (usize, Vec<(usize, usize, bool)>);

impl SyntheticData {
    pub fn generate(config: &SyntheticConfig) -> SyntheticData {
        assert!(config.group_size >= 2);
        assert!(config.players_per_table >= config.group_size && config.attributes_per_table >= config.group_size);
        assert!(config.attributes_per_table <= ATTRIBUTES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut used = BTreeSet::new();
        let mut tables = Vec::new();
        for t in 0..config.tables {
            let mut cols: Vec<&str> = ATTRIBUTES.to_vec();
            cols.shuffle(&mut rng);
            cols.truncate(config.attributes_per_table);
            let mut header = vec!["player".to_string()];
            header.extend(cols.iter().map(|c| c.to_string()));
            let rows = (0..config.players_per_table)
                .map(|_| (0..header.len()).map(|_| fresh_word(&mut rng, &mut used)).collect())
                .collect();
            tables.push(SyntheticTable {
                name: format!("t{t}.tsv"),
                header,
                rows,
            });
        }
        let draw = |rng: &mut ChaCha8Rng| -> Group {
            let t = rng.gen_range(0..config.tables);
            let players = index::sample(rng, config.players_per_table, config.group_size);
            let attrs = index::sample(rng, config.attributes_per_table, config.group_size);
            let cells = players.iter().zip(attrs.iter()).map(|(p, a)| (p, a, !config.second_template || rng.gen_bool(0.5))).collect();
            (t, cells)
        };
        let train_groups: Vec<Group> = (0..config.train_groups).map(|_| draw(&mut rng)).collect();
        let asked: BTreeSet<(usize, usize, usize, bool)> = train_groups
            .iter()
            .flat_map(|(t, cells)| cells.iter().map(move |&(p, a, f)| (*t, p, a, f)))
            .collect();
        let mut val_groups = Vec::new();
        let mut attempts = 0;
        while val_groups.len() < config.val_groups {
            attempts += 1;
            assert!(attempts < 10_000, "generator space too small for a held-out split");
            let g = draw(&mut rng);
            if g.1.iter().all(|&(p, a, f)| !asked.contains(&(g.0, p, a, f))) {
                val_groups.push(g);
            }
        }
        let mut build = |groups: &[Group], prefix: &str| {
            let mut out = Vec::new();
            for (t, cells) in groups {
                let table = &tables[*t];
                let texts: Vec<String> = cells
                    .iter()
                    .map(|&(p, a, _)| format!("R[{}].player.{}", table.header[a + 1], table.rows[p][0]))
                    .collect();
                for &(p, a, first_template) in cells {
                    let (column, entity) = (&table.header[a + 1], &table.rows[p][0]);
                    let question = if first_template {
                        format!("what is the {column} of {entity} ?")
                    } else {
                        format!("which {column} does {entity} have ?")
                    };
                    let mut candidates = texts.clone();
                    candidates.shuffle(&mut rng);
                    out.push(SyntheticQuestion {
                        example: QAExample {
                            id: format!("{prefix}-{}", out.len()),
                            question,
                            table_ref: table.name.clone(),
                            gold_answer: vec![normalize_value(&table.rows[p][a + 1])],
                        },
                        table_index: *t,
                        candidates,
                    });
                }
            }
            out
        };
        let train = build(&train_groups, "train");
        let val = build(&val_groups, "val");
        SyntheticData { tables, train, val }
    }

    /// Labelled training questions for both splits.
    pub fn training_questions(&self, lexicon: &Lexicon, paraphrase_input: bool) -> (Vec<TrainingQuestion>, Vec<TrainingQuestion>) {
        let convert = |qs: &[SyntheticQuestion]| {
            qs.iter()
                .map(|q| {
                    let table = self.tables[q.table_index].table();
                    let set = build_candidates(&q.example, &q.candidates, &table, lexicon, paraphrase_input);
                    TrainingQuestion {
                        id: q.example.id.clone(),
                        question: q.example.question.clone(),
                        candidates: set.candidates,
                    }
                })
                .collect()
        };
        (convert(&self.train), convert(&self.val))
    }

    /// Writes `tables/`, `{split}_examples.tsv` and `{split}_candidates.jsonl`.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<()> {
        let tables_dir = dir.join("tables");
        fs::create_dir_all(&tables_dir)?;
        for t in &self.tables {
            let mut text = t.header.join("\t");
            text.push('\n');
            for r in &t.rows {
                text.push_str(&r.join("\t"));
                text.push('\n');
            }
            fs::write(tables_dir.join(&t.name), text)?;
        }
        for (split, qs) in [("train", &self.train), ("val", &self.val)] {
            let mut examples = String::from("id\tutterance\tcontext\ttargetValue\n");
            let mut candidates = String::new();
            for q in qs {
                let gold: Vec<String> = q.example.gold_answer.iter().map(|v| v.to_string()).collect();
                examples.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    q.example.id,
                    q.example.question,
                    q.example.table_ref,
                    gold.join("|")
                ));
                let record = CandidateRecord {
                    id: q.example.id.clone(),
                    question: q.example.question.clone(),
                    table: q.example.table_ref.clone(),
                    gold,
                    candidates: q.candidates.clone(),
                };
                candidates.push_str(&serde_json::to_string(&record).expect("record serializes"));
                candidates.push('\n');
            }
            fs::write(dir.join(format!("{split}_examples.tsv")), examples)?;
            fs::write(dir.join(format!("{split}_candidates.jsonl")), candidates)?;
        }
        Ok(())
    }
}

/// Index of the text sharing the most distinct tokens with the question;
/// ties go to the earliest text.
pub fn keyword_overlap_top(question: &str, texts: &[String]) -> Option<usize> {
    let q: BTreeSet<String> = tokenize(question).into_iter().collect();
    let scores: Vec<f64> = texts
        .iter()
        .map(|t| tokenize(t).into_iter().collect::<BTreeSet<_>>().intersection(&q).count() as f64)
        .collect();
    crate::training::top_index(&scores)
}
