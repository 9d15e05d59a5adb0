use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lambda_dcs::{answer_of, parse_lf, LogicalForm};
use crate::paraphrase::{paraphrase, Lexicon};
use crate::table::{values_match, QAExample, Table};

use super::TrainError;

/// One executable candidate logical form with its weak label.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub lf: LogicalForm,
    /// Text fed to the paraphrase encoder.
    pub paraphrase_text: String,
    /// True when the form's answer matches the gold answer.
    pub label: bool,
    /// Position in the original candidate list.
    pub source_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Candidates that failed to parse, execute or paraphrase.
    pub dropped: usize,
}

/// Parses, executes, labels and verbalizes each candidate string. Failing
/// candidates are dropped and counted; `paraphrase_input = false` uses the
/// canonical logical form text instead of the paraphrase.
pub fn build_candidates(
    example: &QAExample,
    lf_texts: &[String],
    table: &Table,
    lexicon: &Lexicon,
    paraphrase_input: bool,
) -> CandidateSet {
    let mut candidates = Vec::with_capacity(lf_texts.len());
    let mut dropped = 0;
    for (i, text) in lf_texts.iter().enumerate() {
        let built = parse_lf(text).ok().and_then(|lf| {
            let answer = answer_of(&lf, table).ok()?;
            let paraphrase_text = if paraphrase_input {
                paraphrase(&lf, lexicon).ok()?
            } else {
                lf.serialize()
            };
            Some(Candidate {
                label: !answer.is_empty() && values_match(&answer, &example.gold_answer),
                lf,
                paraphrase_text,
                source_index: i,
            })
        });
        match built {
            Some(c) => candidates.push(c),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::debug!("question {}: dropped {dropped} of {} candidates", example.id, lf_texts.len());
    }
    CandidateSet { candidates, dropped }
}

/// A question ready for training or ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingQuestion {
    pub id: String,
    pub question: String,
    pub candidates: Vec<Candidate>,
}

impl TrainingQuestion {
    pub fn has_positive(&self) -> bool {
        self.candidates.iter().any(|c| c.label)
    }

    pub fn has_negative(&self) -> bool {
        self.candidates.iter().any(|c| !c.label)
    }
}

/// One line of a candidate file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    pub question: String,
    pub table: String,
    pub gold: Vec<String>,
    pub candidates: Vec<String>,
}

pub fn load_candidate_file(path: &Path) -> Result<Vec<CandidateRecord>, TrainError> {
    let err = |message: String| TrainError::CandidateFile {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| err(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn write_candidate_file(path: &Path, records: &[CandidateRecord]) -> Result<(), TrainError> {
    let err = |e: std::io::Error| TrainError::CandidateFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut f = fs::File::create(path).map_err(err)?;
    for r in records {
        let line = serde_json::to_string(r).expect("candidate record serializes");
        writeln!(f, "{line}").map_err(err)?;
    }
    Ok(())
}
