//! Recursive conversion of logical forms into readable paraphrases.
//!
//! Each node renders as the space-joined concatenation of its children's
//! paraphrases and a phrase for its operator:
//!
//! | node          | paraphrase                                        |
//! |---------------|---------------------------------------------------|
//! | aggregation   | operator, then child                              |
//! | join          | relation, connector, child                        |
//! | reverse       | child                                             |
//! | lambda        | body                                              |
//! | arith / merge | left, operator, right                             |
//! | superlative   | operator, value, ordering relation                |
//! | value         | the constant                                      |
//!
//! The [`Lexicon`] supplies every operator phrase and connector. A join
//! through a reversed relation reads "`<relation> of <child>`", a forward
//! join onto a constant reads "`<relation> is <child>`", and a type
//! conversion reads "`as number`". Superlatives over row position read
//! "last row" or "last table row where ..."; over another key they read
//! "row with highest <key>", with the key chain written outside-in
//! ("number of joining year").

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::lambda_dcs::{LogicalForm, RelationName, SuperlativeOp};
use crate::table::CellValue;

#[derive(Debug, Error)]
pub enum ParaphraseError {
    #[error("lexicon has no entry for `{0}`")]
    MissingEntry(String),
    #[error("{path}: line {line}: {message}")]
    LexiconFile { path: String, line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

const DEFAULT_ENTRIES: &[(&str, &str)] = &[
    ("agg.count", "count"),
    ("agg.max", "maximum"),
    ("agg.min", "minimum"),
    ("agg.sum", "sum"),
    ("agg.avg", "average"),
    ("arith.plus", "plus"),
    ("arith.minus", "minus"),
    ("merge.and", "and"),
    ("merge.or", "or"),
    ("cmp.lt", "<"),
    ("cmp.le", "<="),
    ("cmp.gt", ">"),
    ("cmp.ge", ">="),
    ("cmp.ne", "!="),
    ("join.forward", "is"),
    ("join.reverse", "of"),
    ("join.type", "as"),
    ("type.number", "number"),
    ("type.date", "date"),
    ("rel.index", "index"),
    ("rel.next", "next"),
    ("all_rows", "all rows"),
    ("sup.argmax.index.all", "last row"),
    ("sup.argmax.index", "last table row where"),
    ("sup.argmin.index.all", "first row"),
    ("sup.argmin.index", "first table row where"),
    ("sup.all", "row"),
    ("sup.subset", "table row where"),
    ("sup.argmax.key", "with highest"),
    ("sup.argmin.key", "with lowest"),
    ("key.of", "of"),
];

/// Operator and connector phrases keyed by name (`agg.count`, `join.reverse`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            entries: DEFAULT_ENTRIES.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Lexicon {
    /// All keys the paraphraser may look up.
    pub fn known_keys() -> impl Iterator<Item = &'static str> {
        DEFAULT_ENTRIES.iter().map(|(k, _)| *k)
    }

    pub fn empty() -> Lexicon {
        Lexicon {
            entries: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, phrase: &str) {
        self.entries.insert(key.to_string(), phrase.to_string());
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn get(&self, key: &str) -> Result<&str, ParaphraseError> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ParaphraseError::MissingEntry(key.to_string()))
    }

    /// Parses `key=phrase` lines over the default lexicon, so a file only
    /// needs the phrases it changes. `#` starts a comment line.
    pub fn parse(text: &str, origin: &str) -> Result<Lexicon, ParaphraseError> {
        let mut lex = Lexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ParaphraseError::LexiconFile {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, phrase) = line.split_once('=').ok_or_else(|| err("expected key=phrase".into()))?;
            let key = key.trim();
            if !Self::known_keys().any(|k| k == key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            lex.set(key, phrase.trim());
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Lexicon, ParaphraseError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_file_string(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn value_tokens(v: &CellValue) -> Vec<String> {
    match v {
        CellValue::Date { year, month, day } => [month.map(|m| m.to_string()), day.map(|d| d.to_string()), year.map(|y| y.to_string())]
            .into_iter()
            .flatten()
            .collect(),
        other => vec![other.to_string()],
    }
}

struct Paraphraser<'a> {
    lex: &'a Lexicon,
}

impl Paraphraser<'_> {
    fn phrase(&self, key: &str, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        let p = self.lex.get(key)?;
        if !p.is_empty() {
            out.push(p.to_string());
        }
        Ok(())
    }

    fn relation(&self, name: &RelationName, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        match name {
            RelationName::Column(c) => {
                out.push(c.replace('_', " "));
                Ok(())
            }
            RelationName::Index => self.phrase("rel.index", out),
            RelationName::Next => self.phrase("rel.next", out),
            RelationName::Number => self.phrase("type.number", out),
            RelationName::Date => self.phrase("type.date", out),
        }
    }

    fn comparison(&self, z: &LogicalForm, typed: bool, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        let LogicalForm::Comparison { op, value } = z else { unreachable!() };
        if !typed {
            match value {
                CellValue::Number(_) => {
                    self.phrase("join.type", out)?;
                    self.phrase("type.number", out)?;
                }
                CellValue::Date { .. } => {
                    self.phrase("join.type", out)?;
                    self.phrase("type.date", out)?;
                }
                CellValue::Text { .. } => {}
            }
        }
        self.phrase(&format!("cmp.{}", op.name()), out)?;
        out.extend(value_tokens(value));
        Ok(())
    }

    fn render(&self, z: &LogicalForm, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        use LogicalForm as L;
        match z {
            L::Aggregation { op, child } => {
                self.phrase(&format!("agg.{}", op.name()), out)?;
                self.render(child, out)
            }
            L::Join { relation, child } => self.join(relation, child, out),
            L::Reverse(child) => self.render(child, out),
            L::Lambda { body, .. } => self.render(body, out),
            L::Arithmetic { op, left, right } => {
                self.render(left, out)?;
                self.phrase(&format!("arith.{}", op.name()), out)?;
                self.render(right, out)
            }
            L::Merge { op, left, right } => {
                self.render(left, out)?;
                self.phrase(&format!("merge.{}", op.name()), out)?;
                self.render(right, out)
            }
            L::Superlative { op, value, relation } => self.superlative(*op, value, relation, out),
            L::Comparison { .. } => self.comparison(z, false, out),
            L::Relation(name) => self.relation(name, out),
            L::Value(v) => {
                out.extend(value_tokens(v));
                Ok(())
            }
            L::Var(_) => Ok(()),
            L::AllRows => self.phrase("all_rows", out),
        }
    }

    fn join(&self, relation: &LogicalForm, child: &LogicalForm, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        match relation {
            LogicalForm::Reverse(_) => {
                self.render(relation, out)?;
                self.phrase("join.reverse", out)?;
                self.render(child, out)
            }
            LogicalForm::Relation(name) if name.is_type_conversion() => {
                self.phrase("join.type", out)?;
                self.render(relation, out)?;
                match child {
                    LogicalForm::Comparison { .. } => self.comparison(child, true, out),
                    _ => self.render(child, out),
                }
            }
            _ => {
                self.render(relation, out)?;
                if matches!(child, LogicalForm::Value(_)) {
                    self.phrase("join.forward", out)?;
                }
                self.render(child, out)
            }
        }
    }

    fn superlative(
        &self,
        op: SuperlativeOp,
        value: &LogicalForm,
        relation: &LogicalForm,
        out: &mut Vec<String>,
    ) -> Result<(), ParaphraseError> {
        let all = matches!(value, LogicalForm::AllRows);
        let by_index = matches!(relation, LogicalForm::Relation(RelationName::Index));
        let op_key = match (by_index, all) {
            (true, true) => format!("sup.{}.index.all", op.name()),
            (true, false) => format!("sup.{}.index", op.name()),
            (false, true) => "sup.all".to_string(),
            (false, false) => "sup.subset".to_string(),
        };
        self.phrase(&op_key, out)?;
        if !all {
            self.render(value, out)?;
        }
        if !by_index {
            self.phrase(&format!("sup.{}.key", op.name()), out)?;
            self.key(relation, out)?;
        }
        Ok(())
    }

    /// Ordering relations read outside-in: `λx[joining_year.Number.x]`
    /// becomes "number of joining year".
    fn key(&self, relation: &LogicalForm, out: &mut Vec<String>) -> Result<(), ParaphraseError> {
        match relation {
            LogicalForm::Lambda { body, .. } => self.key(body, out),
            LogicalForm::Var(_) => Ok(()),
            LogicalForm::Join { relation: head, child } if is_variable_chain(child) => {
                let before = out.len();
                self.key(child, out)?;
                if out.len() > before {
                    self.phrase("key.of", out)?;
                }
                self.render(head, out)
            }
            other => self.render(other, out),
        }
    }
}

fn is_variable_chain(z: &LogicalForm) -> bool {
    match z {
        LogicalForm::Var(_) => true,
        LogicalForm::Join { child, .. } => is_variable_chain(child),
        _ => false,
    }
}

/// Paraphrases a logical form. The output is lowercase and single-spaced.
pub fn paraphrase(z: &LogicalForm, lex: &Lexicon) -> Result<String, ParaphraseError> {
    let mut tokens = Vec::new();
    Paraphraser { lex }.render(z, &mut tokens)?;
    Ok(tokens.join(" ").split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase())
}
