//! Set-based execution of logical forms against a table.
//!
//! Unary denotations are sets of rows or sets of values; binary ones are
//! sets of `(left, right)` pairs. `Join(b, u)` keeps every left element that
//! is paired with something in `u`. Columns pair a row with its cell, so
//! `Act.RollingStones` is the set of rows whose `act` cell is
//! "rolling stones".

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::*;
use crate::table::{CellValue, Table};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("relation `{0}` does not resolve against the table")]
    UnknownRelation(String),
    #[error("{op} over a non-numeric set")]
    NonNumericAggregate { op: &'static str },
    #[error("{op} over an empty set")]
    EmptyAggregate { op: &'static str },
    #[error("{op} needs single numeric operands")]
    NonSingletonArithmetic { op: &'static str },
    #[error("arithmetic result is not finite")]
    NonFinite,
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// A row index or a value; the members of every denotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Row(usize),
    Value(CellValue),
}

/// Result of executing a logical form. Sets are ordered, so iteration is
/// canonical. An empty unary set is always reported as an empty `EntitySet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Denotation {
    EntitySet(BTreeSet<CellValue>),
    RowSet(BTreeSet<usize>),
    PairSet(BTreeSet<(Element, Element)>),
}

impl Denotation {
    pub fn empty() -> Denotation {
        Denotation::EntitySet(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Denotation::EntitySet(s) => s.is_empty(),
            Denotation::RowSet(s) => s.is_empty(),
            Denotation::PairSet(s) => s.is_empty(),
        }
    }

    /// Classifies a set of elements as rows or values.
    pub fn from_elements(elems: BTreeSet<Element>) -> Result<Denotation, ExecError> {
        if elems.is_empty() {
            return Ok(Denotation::empty());
        }
        let rows = elems.iter().filter(|e| matches!(e, Element::Row(_))).count();
        if rows == elems.len() {
            Ok(Denotation::RowSet(
                elems
                    .into_iter()
                    .map(|e| match e {
                        Element::Row(r) => r,
                        Element::Value(_) => unreachable!(),
                    })
                    .collect(),
            ))
        } else if rows == 0 {
            Ok(Denotation::EntitySet(
                elems
                    .into_iter()
                    .map(|e| match e {
                        Element::Value(v) => v,
                        Element::Row(_) => unreachable!(),
                    })
                    .collect(),
            ))
        } else {
            Err(ExecError::TypeMismatch("set mixes rows and values".into()))
        }
    }

    /// The members of a unary denotation.
    pub fn elements(&self) -> Result<BTreeSet<Element>, ExecError> {
        match self {
            Denotation::EntitySet(s) => Ok(s.iter().cloned().map(Element::Value).collect()),
            Denotation::RowSet(s) => Ok(s.iter().copied().map(Element::Row).collect()),
            Denotation::PairSet(_) => Err(ExecError::TypeMismatch("expected a set, found a relation".into())),
        }
    }

    fn pairs(self) -> Result<BTreeSet<(Element, Element)>, ExecError> {
        match self {
            Denotation::PairSet(p) => Ok(p),
            _ => Err(ExecError::TypeMismatch("expected a relation, found a set".into())),
        }
    }
}

/// Compares `x` against `bound` for a comparison node. Values of different
/// kinds never compare; dates compare on the components both specify.
pub fn compare_values(op: ComparisonOp, x: &CellValue, bound: &CellValue) -> bool {
    use std::cmp::Ordering;
    let ordering = match (x, bound) {
        (CellValue::Number(a), CellValue::Number(b)) => a.partial_cmp(b),
        (
            CellValue::Date { year: y1, month: m1, day: d1 },
            CellValue::Date { year: y2, month: m2, day: d2 },
        ) => {
            let parts = [
                (y1.map(i64::from), y2.map(i64::from)),
                (m1.map(i64::from), m2.map(i64::from)),
                (d1.map(i64::from), d2.map(i64::from)),
            ];
            let shared: Vec<(i64, i64)> = parts.iter().filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
            if shared.is_empty() {
                None
            } else {
                Some(
                    shared
                        .iter()
                        .map(|(a, b)| a.cmp(b))
                        .find(|o| *o != Ordering::Equal)
                        .unwrap_or(Ordering::Equal),
                )
            }
        }
        (CellValue::Text { .. }, CellValue::Text { .. }) if op == ComparisonOp::Ne => Some(x.cmp(bound)),
        _ => None,
    };
    match (op, ordering) {
        (_, None) => false,
        (ComparisonOp::Lt, Some(o)) => o == Ordering::Less,
        (ComparisonOp::Le, Some(o)) => o != Ordering::Greater,
        (ComparisonOp::Gt, Some(o)) => o == Ordering::Greater,
        (ComparisonOp::Ge, Some(o)) => o != Ordering::Less,
        (ComparisonOp::Ne, Some(o)) => o != Ordering::Equal,
    }
}

/// Every element a variable may range over: all rows, all cell values and
/// every row position as a number.
pub fn active_domain(table: &Table) -> BTreeSet<Element> {
    let mut dom: BTreeSet<Element> = (0..table.row_count()).map(Element::Row).collect();
    for row in table.rows() {
        dom.extend(row.iter().cloned().map(Element::Value));
    }
    dom.extend((0..table.row_count()).map(|i| Element::Value(CellValue::Number(i as f64))));
    dom
}

struct Executor<'t> {
    table: &'t Table,
    env: Vec<(String, Element)>,
    domain: Option<BTreeSet<Element>>,
}

impl<'t> Executor<'t> {
    fn domain(&mut self) -> &BTreeSet<Element> {
        let table = self.table;
        self.domain.get_or_insert_with(|| active_domain(table))
    }

    fn relation(&self, name: &RelationName) -> Result<BTreeSet<(Element, Element)>, ExecError> {
        let t = self.table;
        let n = t.row_count();
        Ok(match name {
            RelationName::Column(c) => {
                let col = t.column_index(c).ok_or_else(|| ExecError::UnknownRelation(c.clone()))?;
                (0..n).map(|r| (Element::Row(r), Element::Value(t.cell(r, col).clone()))).collect()
            }
            RelationName::Index => (0..n)
                .map(|r| (Element::Row(r), Element::Value(CellValue::Number(r as f64))))
                .collect(),
            RelationName::Next => (0..n.saturating_sub(1)).map(|r| (Element::Row(r), Element::Row(r + 1))).collect(),
            RelationName::Number | RelationName::Date => {
                let want_number = matches!(name, RelationName::Number);
                t.rows()
                    .iter()
                    .flatten()
                    .filter(|v| {
                        if want_number {
                            matches!(v, CellValue::Number(_))
                        } else {
                            matches!(v, CellValue::Date { .. })
                        }
                    })
                    .map(|v| (Element::Value(v.clone()), Element::Value(v.clone())))
                    .collect()
            }
        })
    }

    fn unary(&mut self, z: &LogicalForm) -> Result<BTreeSet<Element>, ExecError> {
        self.eval(z)?.elements()
    }

    fn numbers(&mut self, z: &LogicalForm, op: &'static str) -> Result<Vec<f64>, ExecError> {
        self.unary(z)?
            .into_iter()
            .map(|e| match e {
                Element::Value(CellValue::Number(x)) => Ok(x),
                _ => Err(ExecError::NonNumericAggregate { op }),
            })
            .collect()
    }

    /// Composes the relations along `b1.b2. ... .var` into one pair set;
    /// `None` when the body has a different shape.
    fn compose_chain(&mut self, var: &str, body: &LogicalForm) -> Result<Option<BTreeSet<(Element, Element)>>, ExecError> {
        let mut relations = Vec::new();
        let mut cur = body;
        loop {
            match cur {
                LogicalForm::Join { relation, child } => {
                    // Primitive relations only: their left sides are never a
                    // mix of rows and values, so composing cannot hide the
                    // type errors that step-by-step joins would raise.
                    let primitive = match relation.as_ref() {
                        LogicalForm::Relation(_) => true,
                        LogicalForm::Reverse(inner) => matches!(inner.as_ref(), LogicalForm::Relation(_)),
                        _ => false,
                    };
                    if !primitive {
                        return Ok(None);
                    }
                    relations.push(self.eval(relation)?.pairs()?);
                    cur = child;
                }
                LogicalForm::Var(v) if v == var => break,
                _ => return Ok(None),
            }
        }
        if relations.is_empty() {
            return Ok(None);
        }
        let mut acc: BTreeSet<(Element, Element)> = relations.pop().unwrap();
        while let Some(outer) = relations.pop() {
            let mut next = BTreeSet::new();
            for (a, b) in &outer {
                for (c, d) in acc.range((b.clone(), Element::Row(0))..) {
                    if c != b {
                        break;
                    }
                    next.insert((a.clone(), d.clone()));
                }
            }
            acc = next;
        }
        // The variable only ranges over the active domain.
        let domain = self.domain().clone();
        Ok(Some(acc.into_iter().filter(|(_, x)| domain.contains(x)).collect()))
    }

    fn eval(&mut self, z: &LogicalForm) -> Result<Denotation, ExecError> {
        use LogicalForm as L;
        match z {
            L::Value(v) => Ok(Denotation::EntitySet([v.clone()].into())),
            L::AllRows => Ok(Denotation::from_elements((0..self.table.row_count()).map(Element::Row).collect())?),
            L::Relation(name) => Ok(Denotation::PairSet(self.relation(name)?)),
            L::Var(name) => {
                let bound = self
                    .env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == name)
                    .map(|(_, e)| e.clone())
                    .ok_or_else(|| ExecError::UnboundVariable(name.clone()))?;
                Denotation::from_elements([bound].into())
            }
            L::Reverse(child) => {
                let pairs = self.eval(child)?.pairs()?;
                Ok(Denotation::PairSet(pairs.into_iter().map(|(a, b)| (b, a)).collect()))
            }
            L::Lambda { var, body } => {
                if let Some(pairs) = self.compose_chain(var, body)? {
                    return Ok(Denotation::PairSet(pairs));
                }
                let domain: Vec<Element> = self.domain().iter().cloned().collect();
                let mut pairs = BTreeSet::new();
                for x in domain {
                    self.env.push((var.clone(), x.clone()));
                    let result = self.unary(body);
                    self.env.pop();
                    for e in result? {
                        pairs.insert((e, x.clone()));
                    }
                }
                Ok(Denotation::PairSet(pairs))
            }
            L::Join { relation, child } => {
                let pairs = self.eval(relation)?.pairs()?;
                let out: BTreeSet<Element> = match child.as_ref() {
                    L::Comparison { op, value } => pairs
                        .into_iter()
                        .filter(|(_, r)| matches!(r, Element::Value(v) if compare_values(*op, v, value)))
                        .map(|(l, _)| l)
                        .collect(),
                    _ => {
                        let targets = self.unary(child)?;
                        pairs
                            .into_iter()
                            .filter(|(_, r)| targets.contains(r))
                            .map(|(l, _)| l)
                            .collect()
                    }
                };
                Denotation::from_elements(out)
            }
            L::Comparison { op, value } => {
                let out: BTreeSet<Element> = self
                    .table
                    .rows()
                    .iter()
                    .flatten()
                    .filter(|v| compare_values(*op, v, value))
                    .cloned()
                    .map(Element::Value)
                    .collect();
                Denotation::from_elements(out)
            }
            L::Merge { op, left, right } => {
                let a = self.unary(left)?;
                let b = self.unary(right)?;
                let out = match op {
                    MergeOp::And => a.intersection(&b).cloned().collect(),
                    MergeOp::Or => a.union(&b).cloned().collect(),
                };
                Denotation::from_elements(out)
            }
            L::Aggregation { op, child } => {
                let name = op.name();
                let result = match op {
                    AggregateOp::Count => self.unary(child)?.len() as f64,
                    _ => {
                        let xs = self.numbers(child, name)?;
                        if xs.is_empty() {
                            return Err(ExecError::EmptyAggregate { op: name });
                        }
                        match op {
                            AggregateOp::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                            AggregateOp::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
                            AggregateOp::Sum => xs.iter().sum(),
                            AggregateOp::Avg => xs.iter().sum::<f64>() / xs.len() as f64,
                            AggregateOp::Count => unreachable!(),
                        }
                    }
                };
                let v = CellValue::number(result).ok_or(ExecError::NonFinite)?;
                Ok(Denotation::EntitySet([v].into()))
            }
            L::Arithmetic { op, left, right } => {
                let name = op.name();
                let single = |xs: Vec<f64>| match xs.as_slice() {
                    [x] => Ok(*x),
                    _ => Err(ExecError::NonSingletonArithmetic { op: name }),
                };
                let a = single(self.numbers(left, name).map_err(|_| ExecError::NonSingletonArithmetic { op: name })?)?;
                let b = single(self.numbers(right, name).map_err(|_| ExecError::NonSingletonArithmetic { op: name })?)?;
                let r = match op {
                    ArithmeticOp::Plus => a + b,
                    ArithmeticOp::Minus => a - b,
                };
                let v = CellValue::number(r).ok_or(ExecError::NonFinite)?;
                Ok(Denotation::EntitySet([v].into()))
            }
            L::Superlative { op, value, relation } => {
                let candidates = self.unary(value)?;
                let pairs = self.eval(relation)?.pairs()?;
                let mut best: Option<(f64, Element)> = None;
                for e in candidates {
                    let keys = pairs
                        .range((e.clone(), Element::Row(0))..)
                        .take_while(|(l, _)| *l == e)
                        .filter_map(|(_, r)| match r {
                            Element::Value(CellValue::Number(k)) => Some(*k),
                            _ => None,
                        });
                    let key = match op {
                        SuperlativeOp::Argmax => keys.fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k)))),
                        SuperlativeOp::Argmin => keys.fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.min(k)))),
                    };
                    let Some(key) = key else { continue };
                    // Strict improvement keeps the earliest element on ties.
                    let better = match (&best, op) {
                        (None, _) => true,
                        (Some((b, _)), SuperlativeOp::Argmax) => key > *b,
                        (Some((b, _)), SuperlativeOp::Argmin) => key < *b,
                    };
                    if better {
                        best = Some((key, e));
                    }
                }
                Denotation::from_elements(best.map(|(_, e)| e).into_iter().collect())
            }
        }
    }
}

/// Executes a logical form on a table. Column names are resolved before
/// evaluation, so an unknown column is an error whatever the table holds.
pub fn execute(z: &LogicalForm, table: &Table) -> Result<Denotation, ExecError> {
    if let Some(name) = unknown_column(z, table) {
        return Err(ExecError::UnknownRelation(name));
    }
    Executor {
        table,
        env: Vec::new(),
        domain: None,
    }
    .eval(z)
}

fn unknown_column(z: &LogicalForm, table: &Table) -> Option<String> {
    if let LogicalForm::Relation(RelationName::Column(c)) = z {
        if table.column_index(c).is_none() {
            return Some(c.clone());
        }
    }
    z.children().into_iter().find_map(|c| unknown_column(c, table))
}

/// Projects a denotation to answer values: rows become their first cell.
/// The result is sorted and duplicate-free.
pub fn denotation_values(d: &Denotation, table: &Table) -> Result<Vec<CellValue>, ExecError> {
    match d {
        Denotation::EntitySet(s) => Ok(s.iter().cloned().collect()),
        Denotation::RowSet(rows) => {
            let set: BTreeSet<CellValue> = rows.iter().map(|&r| table.cell(r, 0).clone()).collect();
            Ok(set.into_iter().collect())
        }
        Denotation::PairSet(_) => Err(ExecError::TypeMismatch("a relation is not an answer".into())),
    }
}

/// Executes `z` and returns its answer values.
pub fn answer_of(z: &LogicalForm, table: &Table) -> Result<Vec<CellValue>, ExecError> {
    denotation_values(&execute(z, table)?, table)
}
