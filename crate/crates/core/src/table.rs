//! Typed tables, cell normalization and answer matching.
//!
//! Cells are typed once, at load time. Every cell becomes a [`CellValue`]:
//! a number when the string is an unambiguous number, a date when it matches
//! one of the known date layouts, and normalized text otherwise.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// Absolute tolerance used when comparing numeric answers.
pub const NUMBER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}: file is empty")]
    Empty(PathBuf),
    #[error("{path}: row {row} has {found} cells, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{path}: line {line}: unsupported escape sequence `\\{escape}`")]
    Escape {
        path: PathBuf,
        line: usize,
        escape: String,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: line {line}: {message}")]
    Examples {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// A typed table cell or answer value.
///
/// Equality and ordering are the canonical identity used by denotations:
/// text compares by its normalized form, numbers exactly, dates by all three
/// (optional) components. Tolerant comparison lives in [`values_match`].
#[derive(Debug, Clone)]
pub enum CellValue {
    Text { surface: String, normalized: String },
    Number(f64),
    Date {
        year: Option<i32>,
        month: Option<u32>,
        day: Option<u32>,
    },
}

impl CellValue {
    pub fn text(surface: &str) -> CellValue {
        CellValue::Text {
            surface: surface.to_string(),
            normalized: normalize_text(surface),
        }
    }

    /// Builds a number, rejecting NaN and infinities. `-0.0` is stored as `0.0`.
    pub fn number(value: f64) -> Option<CellValue> {
        if value.is_finite() {
            Some(CellValue::Number(if value == 0.0 { 0.0 } else { value }))
        } else {
            None
        }
    }

    /// Builds a date; at least one component must be present.
    pub fn date(year: Option<i32>, month: Option<u32>, day: Option<u32>) -> Option<CellValue> {
        if year.is_none() && month.is_none() && day.is_none() {
            return None;
        }
        if month.is_some_and(|m| !(1..=12).contains(&m)) || day.is_some_and(|d| !(1..=31).contains(&d)) {
            return None;
        }
        Some(CellValue::Date { year, month, day })
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            CellValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            CellValue::Text { .. } => ValueKind::Text,
            CellValue::Number(_) => ValueKind::Number,
            CellValue::Date { .. } => ValueKind::Date,
        }
    }

    /// A string that [`normalize_value`] maps back onto an equal value of the
    /// same kind. Text keeps its original surface.
    pub fn surface(&self) -> String {
        match self {
            CellValue::Text { surface, .. } => surface.clone(),
            CellValue::Number(v) => format!("{v}"),
            CellValue::Date { year, month, day } => {
                let y = year.map_or_else(|| "xx".to_string(), |y| format!("{y:04}"));
                let m = month.map_or_else(|| "xx".to_string(), |m| format!("{m:02}"));
                let d = day.map_or_else(|| "xx".to_string(), |d| format!("{d:02}"));
                format!("{y}-{m}-{d}")
            }
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            CellValue::Number(_) => 0,
            CellValue::Date { .. } => 1,
            CellValue::Text { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    Number,
    Date,
}

impl PartialEq for CellValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CellValue {}

impl PartialOrd for CellValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CellValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CellValue::Number(a), CellValue::Number(b)) => a.total_cmp(b),
            (
                CellValue::Date { year: y1, month: m1, day: d1 },
                CellValue::Date { year: y2, month: m2, day: d2 },
            ) => (y1, m1, d1).cmp(&(y2, m2, d2)),
            (CellValue::Text { normalized: a, .. }, CellValue::Text { normalized: b, .. }) => a.cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Text { normalized, .. } => f.write_str(normalized),
            _ => f.write_str(&self.surface()),
        }
    }
}

/// Lowercases and collapses runs of whitespace.
pub fn normalize_text(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)?(?:\.\d+)?$").unwrap())
}

/// Parses integers, decimals and thousands-separated numbers.
pub fn parse_number(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if !s.bytes().any(|b| b.is_ascii_digit()) || !number_re().is_match(s) {
        return None;
    }
    let cleaned: String = s.chars().filter(|&c| c != ',' && c != '+').collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn month_from_name(name: &str) -> Option<u32> {
    let name = name.trim_end_matches('.').to_lowercase();
    if name.len() < 3 {
        return None;
    }
    MONTHS
        .iter()
        .position(|m| *m == name || (name.len() == 3 && m.starts_with(&name)) || (name == "sept" && *m == "september"))
        .map(|i| i as u32 + 1)
}

struct DatePatterns {
    canonical: Regex,
    iso_month: Regex,
    month_day_year: Regex,
    day_month_year: Regex,
    month_year: Regex,
    month_day: Regex,
    day_month: Regex,
    numeric_month_year: Regex,
    slashed: Regex,
    year_only: Regex,
}

fn date_patterns() -> &'static DatePatterns {
    static PATTERNS: OnceLock<DatePatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let month = r"([a-z]{3,9}\.?)";
        let re = |p: String| Regex::new(&p).unwrap();
        DatePatterns {
            canonical: re(r"^(\d{4}|xx)-(\d{1,2}|xx)-(\d{1,2}|xx)$".into()),
            iso_month: re(r"^(\d{4})-(\d{1,2})$".into()),
            month_day_year: re(format!(r"^{month}\s+(\d{{1,2}}),?\s+(\d{{4}})$")),
            day_month_year: re(format!(r"^(\d{{1,2}})\s+{month},?\s+(\d{{4}})$")),
            month_year: re(format!(r"^{month},?\s+(\d{{4}})$")),
            month_day: re(format!(r"^{month}\s+(\d{{1,2}})$")),
            day_month: re(format!(r"^(\d{{1,2}})\s+{month}$")),
            numeric_month_year: re(r"^(\d{1,2})\s+(\d{4})$".into()),
            slashed: re(r"^(\d{1,2})/(\d{1,2})/(\d{4})$".into()),
            year_only: re(r"^(\d{4})$".into()),
        }
    })
}

/// Recognizes the supported date layouts:
///
/// `1965-12-xx` (canonical, `xx` = unknown), `1965-12`, `December 25, 1965`,
/// `25 December 1965`, `December 1965`, `December 25`, `25 December`,
/// `12 1965` (month then year), `12/25/1965` (month/day/year) and `1965`.
/// Month names may be abbreviated to three letters.
pub fn parse_date(raw: &str) -> Option<CellValue> {
    let s = raw.trim().to_lowercase();
    let p = date_patterns();
    let num = |m: Option<regex::Match<'_>>| m.and_then(|m| m.as_str().parse::<u32>().ok());
    let year = |m: Option<regex::Match<'_>>| m.and_then(|m| m.as_str().parse::<i32>().ok());

    if let Some(c) = p.canonical.captures(&s) {
        return CellValue::date(year(c.get(1)), num(c.get(2)), num(c.get(3)));
    }
    if let Some(c) = p.iso_month.captures(&s) {
        return CellValue::date(year(c.get(1)), num(c.get(2)), None);
    }
    if let Some(c) = p.month_day_year.captures(&s) {
        let month = month_from_name(&c[1])?;
        return CellValue::date(year(c.get(3)), Some(month), num(c.get(2)));
    }
    if let Some(c) = p.day_month_year.captures(&s) {
        let month = month_from_name(&c[2])?;
        return CellValue::date(year(c.get(3)), Some(month), num(c.get(1)));
    }
    if let Some(c) = p.month_year.captures(&s) {
        let month = month_from_name(&c[1])?;
        return CellValue::date(year(c.get(2)), Some(month), None);
    }
    if let Some(c) = p.month_day.captures(&s) {
        let month = month_from_name(&c[1])?;
        return CellValue::date(None, Some(month), num(c.get(2)));
    }
    if let Some(c) = p.day_month.captures(&s) {
        let month = month_from_name(&c[2])?;
        return CellValue::date(None, Some(month), num(c.get(1)));
    }
    if let Some(c) = p.numeric_month_year.captures(&s) {
        return CellValue::date(year(c.get(2)), num(c.get(1)), None);
    }
    if let Some(c) = p.slashed.captures(&s) {
        return CellValue::date(year(c.get(3)), num(c.get(1)), num(c.get(2)));
    }
    if let Some(c) = p.year_only.captures(&s) {
        return CellValue::date(year(c.get(1)), None, None);
    }
    None
}

/// Types a raw cell string: number first, then date, else text.
pub fn normalize_value(raw: &str) -> CellValue {
    let trimmed = raw.trim();
    if let Some(v) = parse_number(trimmed).and_then(CellValue::number) {
        return v;
    }
    if let Some(d) = parse_date(trimmed) {
        return d;
    }
    CellValue::text(trimmed)
}

/// Re-types text values so that `Text("2")` and `Number(2)` compare equal.
fn canonical(v: &CellValue) -> CellValue {
    match v {
        CellValue::Text { surface, .. } => normalize_value(surface),
        other => other.clone(),
    }
}

fn dates_agree(a: (Option<i32>, Option<u32>, Option<u32>), b: (Option<i32>, Option<u32>, Option<u32>)) -> bool {
    let mut shared = 0;
    if let (Some(x), Some(y)) = (a.0, b.0) {
        if x != y {
            return false;
        }
        shared += 1;
    }
    if let (Some(x), Some(y)) = (a.1, b.1) {
        if x != y {
            return false;
        }
        shared += 1;
    }
    if let (Some(x), Some(y)) = (a.2, b.2) {
        if x != y {
            return false;
        }
        shared += 1;
    }
    shared > 0
}

/// Tolerant equality of two single values.
pub fn value_matches(a: &CellValue, b: &CellValue) -> bool {
    match (canonical(a), canonical(b)) {
        (CellValue::Number(x), CellValue::Number(y)) => (x - y).abs() <= NUMBER_TOLERANCE,
        (
            CellValue::Date { year: y1, month: m1, day: d1 },
            CellValue::Date { year: y2, month: m2, day: d2 },
        ) => dates_agree((y1, m1, d1), (y2, m2, d2)),
        (CellValue::Text { normalized: x, .. }, CellValue::Text { normalized: y, .. }) => x == y,
        _ => false,
    }
}

/// Set equality of two answer lists under [`value_matches`]: every value on
/// either side has a match on the other. Order and duplicates are ignored.
pub fn values_match(a: &[CellValue], b: &[CellValue]) -> bool {
    a.iter().all(|x| b.iter().any(|y| value_matches(x, y)))
        && b.iter().all(|y| a.iter().any(|x| value_matches(x, y)))
}

/// Turns a header cell into a relation identifier: lowercase, runs of
/// non-alphanumerics become one underscore, trimmed.
pub fn normalize_column_name(raw: &str) -> String {
    let mut out = String::new();
    let mut pending_sep = false;
    for c in raw.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.push(c);
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        out.push_str("column");
    }
    out
}

fn dedupe_columns(raw: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for name in raw {
        let base = normalize_column_name(name);
        let mut candidate = base.clone();
        let mut k = 2;
        while seen.contains(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        seen.insert(candidate.clone());
        out.push(candidate);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Tsv,
    Csv,
}

impl TableFormat {
    /// `.tsv` files are tab-separated, everything else is read as CSV.
    pub fn from_path(path: &Path) -> TableFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => TableFormat::Tsv,
            _ => TableFormat::Csv,
        }
    }
}

/// An immutable rectangular table of typed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<CellValue>>,
}

impl Table {
    /// Builds a table from a raw header and raw rows, typing every cell.
    /// Returns the index of the first ragged row on failure.
    pub fn from_raw<S: AsRef<str>>(header: &[S], rows: &[Vec<S>]) -> Result<Table, (usize, usize)> {
        let header: Vec<String> = header.iter().map(|s| s.as_ref().to_string()).collect();
        let mut typed = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err((i, row.len()));
            }
            typed.push(row.iter().map(|c| normalize_value(c.as_ref())).collect());
        }
        Ok(Table {
            columns: dedupe_columns(&header),
            rows: typed,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellValue {
        &self.rows[row][col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &CellValue> + '_ {
        self.rows.iter().map(move |r| &r[col])
    }
}

fn unescape_tsv_field(field: &str, path: &Path, line: usize, allow_pipe: bool) -> Result<String, TableError> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some('p') if allow_pipe => out.push('|'),
            other => {
                return Err(TableError::Escape {
                    path: path.to_path_buf(),
                    line,
                    escape: other.map(String::from).unwrap_or_default(),
                })
            }
        }
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String, TableError> {
    fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn split_tsv(text: &str, path: &Path) -> Result<Vec<Vec<String>>, TableError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.trim_end_matches('\r')
                .split('\t')
                .map(|f| unescape_tsv_field(f, path, i + 1, false))
                .collect()
        })
        .collect()
}

fn split_csv(text: &str, path: &Path) -> Result<Vec<Vec<String>>, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TableError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        records.push(record.iter().map(str::to_string).collect());
    }
    Ok(records)
}

/// Reads a table file. The first record is the header.
pub fn load_table(path: &Path, format: TableFormat) -> Result<Table, TableError> {
    let text = read_text(path)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    if text.trim().is_empty() {
        return Err(TableError::Empty(path.to_path_buf()));
    }
    let mut records = match format {
        TableFormat::Tsv => split_tsv(text, path)?,
        TableFormat::Csv => split_csv(text, path)?,
    };
    let header = records.remove(0);
    Table::from_raw(&header, &records).map_err(|(row, found)| TableError::Ragged {
        path: path.to_path_buf(),
        row,
        found,
        expected: header.len(),
    })
}

/// One question with its table reference and gold answer.
#[derive(Debug, Clone, PartialEq)]
pub struct QAExample {
    pub id: String,
    pub question: String,
    pub table_ref: String,
    pub gold_answer: Vec<CellValue>,
}

/// Splits a `|`-joined gold answer field into typed values.
pub fn parse_gold(field: &str) -> Vec<CellValue> {
    field.split('|').map(normalize_value).collect()
}

/// Reads a question file with columns `id`, `utterance`, `context` and
/// `targetValue` (gold answers joined by `|`, `\p` escapes a literal pipe).
pub fn load_examples(path: &Path) -> Result<Vec<QAExample>, TableError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let err = |line: usize, message: String| TableError::Examples {
        path: path.to_path_buf(),
        line,
        message,
    };
    let (_, header) = lines.next().ok_or_else(|| TableError::Empty(path.to_path_buf()))?;
    let header: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| err(1, format!("missing column `{name}`")))
    };
    let (id_col, q_col, ctx_col, target_col) = (find("id")?, find("utterance")?, find("context")?, find("targetValue")?);
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != header.len() {
            return Err(err(i + 1, format!("expected {} fields, found {}", header.len(), fields.len())));
        }
        let field = |c: usize| unescape_tsv_field(fields[c], path, i + 1, true);
        // Pipes separate answers; escaped pipes are restored per answer.
        let gold: Vec<CellValue> = fields[target_col]
            .split('|')
            .map(|part| unescape_tsv_field(part, path, i + 1, true).map(|s| normalize_value(&s)))
            .collect::<Result<_, _>>()?;
        if gold.is_empty() || fields[target_col].is_empty() {
            return Err(err(i + 1, "empty gold answer".into()));
        }
        out.push(QAExample {
            id: field(id_col)?,
            question: field(q_col)?,
            table_ref: field(ctx_col)?,
            gold_answer: gold,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_tsv_and_types_cells() {
        let f = write_tmp("act\tattendance\nRolling Stones\t50000\nBeatles\t40000\n", ".tsv");
        let t = load_table(f.path(), TableFormat::Tsv).unwrap();
        assert_eq!(t.col_count(), 2);
        assert_eq!(t.row_count(), 2);
        assert_eq!(t.cell(0, 1), &CellValue::Number(50000.0));
        assert_eq!(t.cell(1, 0), &CellValue::text("beatles"));
    }

    #[test]
    fn header_only_table_has_no_rows() {
        let f = write_tmp("a\tb\n", ".tsv");
        let t = load_table(f.path(), TableFormat::Tsv).unwrap();
        assert_eq!(t.row_count(), 0);
        assert_eq!(t.col_count(), 2);
    }

    #[test]
    fn load_errors() {
        let ragged = write_tmp("a\tb\n1\t2\n3\n", ".tsv");
        match load_table(ragged.path(), TableFormat::Tsv) {
            Err(TableError::Ragged { row, found, expected, .. }) => assert_eq!((row, found, expected), (1, 1, 2)),
            other => panic!("expected ragged error, got {other:?}"),
        }
        let empty = write_tmp("", ".tsv");
        assert!(matches!(load_table(empty.path(), TableFormat::Tsv), Err(TableError::Empty(_))));
        let escape = write_tmp("a\nbad\\q\n", ".tsv");
        assert!(matches!(load_table(escape.path(), TableFormat::Tsv), Err(TableError::Escape { .. })));
        let missing = Path::new("/nonexistent/table.tsv");
        assert!(matches!(load_table(missing, TableFormat::Tsv), Err(TableError::Io { .. })));
    }

    #[test]
    fn tsv_escapes_and_csv_quoting() {
        let f = write_tmp("name\tnote\nx\ta\\tb\\nc\\\\\n", ".tsv");
        let t = load_table(f.path(), TableFormat::Tsv).unwrap();
        assert_eq!(t.cell(0, 1).surface(), "a\tb\nc\\");

        let f = write_tmp("name,note\n\"Smith, J\",\"say \"\"hi\"\"\"\n", ".csv");
        let t = load_table(f.path(), TableFormat::Csv).unwrap();
        assert_eq!(t.cell(0, 0).surface(), "Smith, J");
        assert_eq!(t.cell(0, 1).surface(), "say \"hi\"");
    }

    #[test]
    fn column_names_normalize_and_dedupe() {
        let t = Table::from_raw(&["Original air date", "Name", "name", "NAME!", "#"], &[]).unwrap();
        assert_eq!(t.column_names(), &["original_air_date", "name", "name_2", "name_3", "column"]);
    }

    #[test]
    fn normalize_value_examples() {
        assert_eq!(normalize_value("50,000"), CellValue::Number(50000.0));
        assert_eq!(normalize_value("12 1965"), CellValue::date(Some(1965), Some(12), None).unwrap());
        assert_eq!(normalize_value("Rolling Stones"), CellValue::text("rolling stones"));
        match normalize_value("  Rolling   Stones ") {
            CellValue::Text { normalized, .. } => assert_eq!(normalized, "rolling stones"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(normalize_value("nan"), CellValue::Text { .. }));
        assert!(matches!(normalize_value("inf"), CellValue::Text { .. }));
        assert_eq!(normalize_value("-3.5"), CellValue::Number(-3.5));
        assert_eq!(normalize_value(".5"), CellValue::Number(0.5));
        assert!(matches!(normalize_value("1,00"), CellValue::Text { .. }));
    }

    /// Every supported layout, written out by hand.
    #[test]
    fn date_pattern_table() {
        let d = |y: Option<i32>, m: Option<u32>, day: Option<u32>| CellValue::date(y, m, day).unwrap();
        let cases = [
            ("December 1965", d(Some(1965), Some(12), None)),
            ("Dec 1965", d(Some(1965), Some(12), None)),
            ("december, 1965", d(Some(1965), Some(12), None)),
            ("1965-12-xx", d(Some(1965), Some(12), None)),
            ("1965-xx-xx", d(Some(1965), None, None)),
            ("xx-12-25", d(None, Some(12), Some(25))),
            ("1965-12-25", d(Some(1965), Some(12), Some(25))),
            ("1965-12", d(Some(1965), Some(12), None)),
            ("December 25, 1965", d(Some(1965), Some(12), Some(25))),
            ("25 December 1965", d(Some(1965), Some(12), Some(25))),
            ("Sept. 3", d(None, Some(9), Some(3))),
            ("3 June", d(None, Some(6), Some(3))),
            ("12 1965", d(Some(1965), Some(12), None)),
            ("12/25/1965", d(Some(1965), Some(12), Some(25))),
        ];
        for (raw, want) in cases {
            assert_eq!(normalize_value(raw), want, "{raw}");
        }
        assert_eq!(parse_date("1965"), Some(d(Some(1965), None, None)));
        assert_eq!(normalize_value("1965"), CellValue::Number(1965.0));
        assert!(matches!(normalize_value("13 1965"), CellValue::Text { .. }));
        assert!(matches!(normalize_value("Smarch 1965"), CellValue::Text { .. }));
        assert!(matches!(normalize_value("xx-xx-xx"), CellValue::Text { .. }));
    }

    #[test]
    fn values_match_examples() {
        assert!(values_match(&[CellValue::Number(2.0)], &[CellValue::text("2")]));
        assert!(values_match(
            &[CellValue::text("a"), CellValue::text("b")],
            &[CellValue::text("b"), CellValue::text("A")]
        ));
        assert!(!values_match(&[CellValue::Number(2.0)], &[CellValue::Number(3.0)]));
        assert!(values_match(&[CellValue::Number(2.0)], &[CellValue::Number(2.0 + 5e-7)]));
        let dec = CellValue::date(Some(1965), Some(12), None).unwrap();
        let full = CellValue::date(Some(1965), Some(12), Some(4)).unwrap();
        assert!(values_match(std::slice::from_ref(&dec), &[full]));
        assert!(values_match(&[dec], &[CellValue::text("December 1965")]));
        assert!(!values_match(&[], &[CellValue::Number(1.0)]));
    }

    fn arb_value() -> impl Strategy<Value = CellValue> {
        prop_oneof![
            (-1000i32..1000).prop_map(|n| CellValue::Number(n as f64 / 4.0)),
            "[a-c]{1,3}".prop_map(|s| CellValue::text(&s)),
            (1900i32..2000, proptest::option::of(1u32..13)).prop_map(|(y, m)| CellValue::date(Some(y), m, None).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn values_match_is_reflexive_symmetric_and_set_like(
            a in proptest::collection::vec(arb_value(), 0..5),
            b in proptest::collection::vec(arb_value(), 0..5),
            seed in any::<u64>(),
        ) {
            prop_assert!(values_match(&a, &a));
            prop_assert_eq!(values_match(&a, &b), values_match(&b, &a));
            let mut shuffled = a.clone();
            if !shuffled.is_empty() {
                let k = (seed as usize) % shuffled.len();
                shuffled.rotate_left(k);
                shuffled.push(shuffled[0].clone());
            }
            prop_assert!(values_match(&a, &shuffled));
            prop_assert_eq!(values_match(&shuffled, &b), values_match(&a, &b));
        }

        #[test]
        fn normalize_is_idempotent_on_kind(raw in "[ a-zA-Z0-9,./-]{0,16}") {
            let first = normalize_value(&raw);
            let second = normalize_value(&first.surface());
            prop_assert_eq!(first.kind(), second.kind());
            prop_assert_eq!(first, second);
        }

        #[test]
        fn loading_is_deterministic(cells in proptest::collection::vec("[a-z0-9 ]{0,6}", 2..12)) {
            let mut body = String::from("x\ty\n");
            for pair in cells.chunks(2) {
                if pair.len() == 2 {
                    body.push_str(&format!("{}\t{}\n", pair[0], pair[1]));
                }
            }
            let f = write_tmp(&body, ".tsv");
            let a = load_table(f.path(), TableFormat::Tsv).unwrap();
            let b = load_table(f.path(), TableFormat::Tsv).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn examples_file_reads_dataset_layout() {
        let f = write_tmp(
            "id\tutterance\tcontext\ttargetValue\nnu-0\tHow many?\tcsv/1.csv\t2\nnu-1\tWho?\tcsv/2.csv\ta\\pb|c\n",
            ".tsv",
        );
        let ex = load_examples(f.path()).unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[0].gold_answer, vec![CellValue::Number(2.0)]);
        assert_eq!(ex[1].gold_answer, vec![CellValue::text("a|b"), CellValue::text("c")]);
        assert_eq!(ex[1].table_ref, "csv/2.csv");
    }
}
