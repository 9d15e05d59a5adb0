//! Reader for the textual logical-form syntax.
//!
//! Two surface styles are accepted and may be mixed: the dotted shorthand
//! `R[λx[Attendance.Number.x]].argmax(Act.RollingStones,Index)` and function
//! calls such as `join(Act, "rolling stones")` or `lambda(x, ...)`.
//!
//! An identifier means a relation when it heads a join (`A.B`), sits inside
//! `R[...]`, or is the ordering argument of a superlative. Anywhere else it
//! is a constant: `RollingStones` becomes the text `rolling stones`. A single
//! letter optionally followed by digits (`x`, `y2`) is a variable and must be
//! bound by an enclosing lambda. Columns whose names collide with a builtin
//! are written `col:number`.

use thiserror::Error;

use super::ast::*;
use crate::table::{normalize_column_name, normalize_value, CellValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LfParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{name}` at offset {offset}")]
    UnboundVariable { offset: usize, name: String },
    #[error("unknown operator `{name}` at offset {offset}")]
    UnknownOperator { offset: usize, name: String },
}

impl LfParseError {
    pub fn offset(&self) -> usize {
        match self {
            LfParseError::Syntax { offset, .. }
            | LfParseError::UnboundVariable { offset, .. }
            | LfParseError::UnknownOperator { offset, .. } => *offset,
        }
    }
}

const MAX_NESTING: usize = 200;

const FUNCTIONS: [&str; 17] = [
    "count", "max", "min", "sum", "avg", "plus", "minus", "and", "or", "argmax", "argmin", "join", "lambda", "value",
    "allrows", "r", "col",
];

/// Names that need the `col:` prefix when used as column identifiers.
pub(crate) fn is_keyword(name: &str) -> bool {
    FUNCTIONS.contains(&name)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Dot,
    Comma,
    Colon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lambda,
    Cmp(ComparisonOp),
    Eof,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Number(n) => format!("number {n}"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Eof => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, LfParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |offset: usize, message: &str| LfParseError::Syntax {
        offset,
        message: message.to_string(),
    };
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let digit_at = |k: usize| bytes.get(k).is_some_and(u8::is_ascii_digit);
        let starts_number =
            c.is_ascii_digit() || (c == '-' && (digit_at(i + 1) || (bytes.get(i + 1) == Some(&b'.') && digit_at(i + 2))));
        if starts_number {
            let mut j = i + 1;
            while j < src.len() && (bytes[j].is_ascii_digit() || (bytes[j] == b'.' && digit_at(j + 1))) {
                j += 1;
            }
            let text = &src[i..j];
            let n = text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(start, "malformed number"))?;
            out.push((Tok::Number(n), start));
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            // λ is alphabetic, so it has to be caught first.
            if c == 'λ' {
                out.push((Tok::Lambda, start));
                i += c.len_utf8();
                continue;
            }
            let mut j = i;
            for ch in src[i..].chars() {
                if ch.is_alphanumeric() || ch == '_' {
                    j += ch.len_utf8();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(src[i..j].to_string()), start));
            i = j;
            continue;
        }
        let two = src.get(i..i + 2);
        let (tok, len) = match (c, two) {
            (_, Some("<=")) => (Tok::Cmp(ComparisonOp::Le), 2),
            (_, Some(">=")) => (Tok::Cmp(ComparisonOp::Ge), 2),
            (_, Some("!=")) => (Tok::Cmp(ComparisonOp::Ne), 2),
            ('<', _) => (Tok::Cmp(ComparisonOp::Lt), 1),
            ('>', _) => (Tok::Cmp(ComparisonOp::Gt), 1),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('"', _) => {
                let mut s = String::new();
                let mut chars = src[i + 1..].char_indices();
                let mut end = None;
                while let Some((k, ch)) = chars.next() {
                    match ch {
                        '"' => {
                            end = Some(i + 1 + k + 1);
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, '"')) => s.push('"'),
                            Some((_, '\\')) => s.push('\\'),
                            Some((_, 'n')) => s.push('\n'),
                            Some((_, 't')) => s.push('\t'),
                            Some((k2, _)) => return Err(syntax(i + 1 + k2, "unknown string escape")),
                            None => break,
                        },
                        ch => s.push(ch),
                    }
                }
                let end = end.ok_or_else(|| syntax(src.len(), "unterminated string"))?;
                out.push((Tok::Str(s), start));
                i = end;
                continue;
            }
            _ => return Err(syntax(start, &format!("unexpected character `{c}`"))),
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

/// Splits `RollingStones` into `Rolling Stones` and underscores into spaces.
pub fn split_identifier(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::with_capacity(name.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' {
            out.push(' ');
            continue;
        }
        if i > 0 && c.is_uppercase() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push(' ');
            }
        }
        out.push(c);
    }
    out
}

fn is_var_shaped(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_digit())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Unary,
    Binary,
}

enum Primary {
    Ident { name: String, offset: usize },
    Column(String),
    Node(LogicalForm),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: Vec<String>,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> LfParseError {
        LfParseError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), LfParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn expr(&mut self, role: Role) -> Result<LogicalForm, LfParseError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(self.error("expression nested too deeply".into()));
        }
        let head = self.primary()?;
        let out = if role == Role::Unary && *self.peek() == Tok::Dot {
            let relation = self.resolve(head, Role::Binary)?;
            self.bump();
            let child = self.expr(Role::Unary)?;
            LogicalForm::Join {
                relation: Box::new(relation),
                child: Box::new(child),
            }
        } else {
            self.resolve(head, role)?
        };
        self.nesting -= 1;
        Ok(out)
    }

    fn resolve(&self, prim: Primary, role: Role) -> Result<LogicalForm, LfParseError> {
        match prim {
            Primary::Node(node) => Ok(node),
            Primary::Column(name) => Ok(LogicalForm::Relation(RelationName::Column(name))),
            Primary::Ident { name, offset } => match role {
                Role::Binary => {
                    let normalized = normalize_column_name(&split_identifier(&name));
                    Ok(LogicalForm::Relation(
                        RelationName::builtin(&normalized).unwrap_or(RelationName::Column(normalized)),
                    ))
                }
                Role::Unary => {
                    if is_var_shaped(&name) {
                        let var = name.to_lowercase();
                        if self.scope.contains(&var) {
                            Ok(LogicalForm::Var(var))
                        } else {
                            Err(LfParseError::UnboundVariable { offset, name })
                        }
                    } else if name.eq_ignore_ascii_case("allrows") {
                        Ok(LogicalForm::AllRows)
                    } else {
                        Ok(LogicalForm::Value(normalize_value(&split_identifier(&name))))
                    }
                }
            },
        }
    }

    fn literal(&mut self) -> Result<CellValue, LfParseError> {
        match self.bump() {
            (Tok::Number(n), _) => Ok(CellValue::Number(if n == 0.0 { 0.0 } else { n })),
            (Tok::Str(s), _) => Ok(normalize_value(&s)),
            (Tok::Ident(name), _) => Ok(normalize_value(&split_identifier(&name))),
            (tok, offset) => Err(LfParseError::Syntax {
                offset,
                message: format!("expected a constant, found {}", describe(&tok)),
            }),
        }
    }

    fn primary(&mut self) -> Result<Primary, LfParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Number(_) | Tok::Str(_) => Ok(Primary::Node(LogicalForm::Value(self.literal()?))),
            Tok::Cmp(op) => {
                self.bump();
                let value = self.literal()?;
                Ok(Primary::Node(LogicalForm::Comparison { op, value }))
            }
            Tok::LParen => {
                self.bump();
                // Role is decided by the caller; a parenthesized chain is unary.
                let inner = self.expr(Role::Unary)?;
                self.expect(Tok::RParen)?;
                Ok(Primary::Node(inner))
            }
            Tok::Lambda => {
                self.bump();
                let var = match self.bump() {
                    (Tok::Ident(v), _) if is_var_shaped(&v) => v.to_lowercase(),
                    (tok, offset) => {
                        return Err(LfParseError::Syntax {
                            offset,
                            message: format!("expected a variable after λ, found {}", describe(&tok)),
                        })
                    }
                };
                self.expect(Tok::LBracket)?;
                let body = self.scoped(&var, |p| p.expr(Role::Unary))?;
                self.expect(Tok::RBracket)?;
                Ok(Primary::Node(LogicalForm::Lambda {
                    var,
                    body: Box::new(body),
                }))
            }
            Tok::Ident(name) => {
                let lower = name.to_lowercase();
                match self.peek_at(1) {
                    Tok::LBracket if lower == "r" => {
                        self.bump();
                        self.bump();
                        let inner = self.expr(Role::Binary)?;
                        self.expect(Tok::RBracket)?;
                        Ok(Primary::Node(LogicalForm::Reverse(Box::new(inner))))
                    }
                    Tok::Colon if lower == "col" => {
                        self.bump();
                        self.bump();
                        match self.bump() {
                            (Tok::Ident(col), _) => Ok(Primary::Column(normalize_column_name(&split_identifier(&col)))),
                            (tok, offset) => Err(LfParseError::Syntax {
                                offset,
                                message: format!("expected a column name after `col:`, found {}", describe(&tok)),
                            }),
                        }
                    }
                    Tok::LParen => {
                        self.bump();
                        self.bump();
                        let node = self.call(&lower, &name, offset)?;
                        self.expect(Tok::RParen)?;
                        Ok(Primary::Node(node))
                    }
                    _ => {
                        self.bump();
                        Ok(Primary::Ident { name, offset })
                    }
                }
            }
            other => Err(self.error(format!("unexpected {}", describe(&other)))),
        }
    }

    fn scoped<T>(&mut self, var: &str, f: impl FnOnce(&mut Self) -> Result<T, LfParseError>) -> Result<T, LfParseError> {
        self.scope.push(var.to_string());
        let out = f(self);
        self.scope.pop();
        out
    }

    fn two(&mut self, first: Role, second: Role) -> Result<(LogicalForm, LogicalForm), LfParseError> {
        let a = self.expr(first)?;
        self.expect(Tok::Comma)?;
        let b = self.expr(second)?;
        Ok((a, b))
    }

    fn call(&mut self, lower: &str, name: &str, offset: usize) -> Result<LogicalForm, LfParseError> {
        let agg = match lower {
            "count" => Some(AggregateOp::Count),
            "max" => Some(AggregateOp::Max),
            "min" => Some(AggregateOp::Min),
            "sum" => Some(AggregateOp::Sum),
            "avg" => Some(AggregateOp::Avg),
            _ => None,
        };
        if let Some(op) = agg {
            let child = self.expr(Role::Unary)?;
            return Ok(LogicalForm::Aggregation {
                op,
                child: Box::new(child),
            });
        }
        use LogicalForm as L;
        Ok(match lower {
            "plus" | "minus" => {
                let op = if lower == "plus" { ArithmeticOp::Plus } else { ArithmeticOp::Minus };
                let (l, r) = self.two(Role::Unary, Role::Unary)?;
                L::Arithmetic {
                    op,
                    left: Box::new(l),
                    right: Box::new(r),
                }
            }
            "and" | "or" => {
                let op = if lower == "and" { MergeOp::And } else { MergeOp::Or };
                let (l, r) = self.two(Role::Unary, Role::Unary)?;
                L::Merge {
                    op,
                    left: Box::new(l),
                    right: Box::new(r),
                }
            }
            "argmax" | "argmin" => {
                let op = if lower == "argmax" { SuperlativeOp::Argmax } else { SuperlativeOp::Argmin };
                let (value, relation) = self.two(Role::Unary, Role::Binary)?;
                L::Superlative {
                    op,
                    value: Box::new(value),
                    relation: Box::new(relation),
                }
            }
            "join" => {
                let (relation, child) = self.two(Role::Binary, Role::Unary)?;
                L::Join {
                    relation: Box::new(relation),
                    child: Box::new(child),
                }
            }
            "lambda" => {
                let var = match self.bump() {
                    (Tok::Ident(v), _) if is_var_shaped(&v) => v.to_lowercase(),
                    (tok, offset) => {
                        return Err(LfParseError::Syntax {
                            offset,
                            message: format!("expected a variable, found {}", describe(&tok)),
                        })
                    }
                };
                self.expect(Tok::Comma)?;
                let body = self.scoped(&var, |p| p.expr(Role::Unary))?;
                L::Lambda {
                    var,
                    body: Box::new(body),
                }
            }
            "value" => L::Value(self.literal()?),
            _ => {
                return Err(LfParseError::UnknownOperator {
                    offset,
                    name: name.to_string(),
                })
            }
        })
    }
}

/// Parses a logical form from text.
pub fn parse_lf(text: &str) -> Result<LogicalForm, LfParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        scope: Vec::new(),
        nesting: 0,
    };
    let lf = parser.expr(Role::Unary)?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(format!("unexpected trailing {}", describe(parser.peek()))));
    }
    Ok(lf)
}
