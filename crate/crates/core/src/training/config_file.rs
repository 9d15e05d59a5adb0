//! `key=value` training configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Relative paths resolve against the directory holding the file. Keys not
//! listed keep their defaults.

use std::path::{Path, PathBuf};

use super::{Pairing, TrainConfig};
use crate::par::Execution;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{origin}:{line}: {message}")]
pub struct ConfigFileError {
    pub origin: String,
    pub line: usize,
    pub message: String,
}

/// A training config plus the file-only settings that sit beside it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainFile {
    pub train: TrainConfig,
    /// Validation split for early stopping; training data is used if absent.
    pub val_examples: Option<PathBuf>,
    pub val_candidates: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("expected a boolean, got {v:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    v.split(',').map(|s| parse_num(s.trim())).collect()
}

impl TrainFile {
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> Result<TrainFile, ConfigFileError> {
        let mut out = TrainFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigFileError {
                origin: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            out.set(key.trim(), value.trim(), base_dir).map_err(err)?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<TrainFile, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigFileError {
            origin: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        TrainFile::parse(&text, base, &path.display().to_string())
    }

    fn set(&mut self, key: &str, v: &str, base: &Path) -> Result<(), String> {
        let path = || Some(base.join(v));
        let t = &mut self.train;
        let m = &mut t.model;
        match key {
            "theta" => t.theta = parse_num(v)?,
            "learning_rate" => t.learning_rate = parse_num(v)?,
            "beta1" => t.beta1 = parse_num(v)?,
            "beta2" => t.beta2 = parse_num(v)?,
            "epsilon" => t.epsilon = parse_num(v)?,
            "batch_size" => t.batch_size = parse_num(v)?,
            "max_epochs" => t.max_epochs = parse_num(v)?,
            "patience" => t.patience = parse_num(v)?,
            "pairs_per_question" => t.pairs_per_question = parse_num(v)?,
            "seed" => t.seed = parse_num(v)?,
            "pairing" => {
                t.pairing = match v {
                    "per_question" => Pairing::PerQuestion,
                    "global" => Pairing::Global,
                    _ => return Err(format!("pairing must be per_question or global, got {v:?}")),
                }
            }
            "parallel" => {
                t.execution = if parse_bool(v)? {
                    Execution::Parallel
                } else {
                    Execution::Sequential
                }
            }
            "no_dropout" => t.ablations.no_dropout = parse_bool(v)?,
            "no_char_emb" => t.ablations.no_char_emb = parse_bool(v)?,
            "no_glove" => t.ablations.no_glove = parse_bool(v)?,
            "no_paraphrase" => t.ablations.no_paraphrase = parse_bool(v)?,
            "word_vectors" => t.word_vectors = path(),
            "word_dim" => m.word_dim = parse_num(v)?,
            "char_dim" => m.char_dim = parse_num(v)?,
            "char_filters" => m.char_filters = parse_num(v)?,
            "char_widths" => m.char_widths = parse_list(v)?,
            "sentence_filters" => m.sentence_filters = parse_num(v)?,
            "sentence_widths" => m.sentence_widths = parse_list(v)?,
            "hidden" => m.hidden = parse_num(v)?,
            "mode" => m.mode = v.parse().map_err(|e| format!("{e}"))?,
            "keep_prob" => m.keep_prob = parse_num(v)?,
            "alpha_init" => m.alpha_init = parse_num(v)?,
            "use_char" => m.use_char = parse_bool(v)?,
            "val_examples" => self.val_examples = path(),
            "val_candidates" => self.val_candidates = path(),
            "lexicon" => self.lexicon = path(),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}
