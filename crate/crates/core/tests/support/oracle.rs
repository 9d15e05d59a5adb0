//! A deliberately naive Lambda DCS interpreter and a random generator of
//! well-typed logical forms, used to cross-check the executor.
//!
//! The oracle works on sorted, deduplicated vectors, scans relations
//! linearly and always evaluates lambdas by looping over the active domain,
//! so it shares no evaluation code with the executor.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabrank::lambda_dcs::{
    build::*, execute, AggregateOp, ArithmeticOp, ComparisonOp, Denotation, Element, ExecError, LogicalForm, MergeOp,
    RelationName, SuperlativeOp,
};
use tabrank::table::{CellValue, Table};

#[derive(Debug, Clone, PartialEq)]
enum Naive {
    Set(Vec<Element>),
    Rel(Vec<(Element, Element)>),
}

/// Error classes; the oracle does not try to reproduce messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fail {
    Unknown,
    NonNumeric,
    Empty,
    NonSingleton,
    NonFinite,
    Type,
}

pub fn class(e: &ExecError) -> Fail {
    match e {
        ExecError::UnknownRelation(_) => Fail::Unknown,
        ExecError::NonNumericAggregate { .. } => Fail::NonNumeric,
        ExecError::EmptyAggregate { .. } => Fail::Empty,
        ExecError::NonSingletonArithmetic { .. } => Fail::NonSingleton,
        ExecError::NonFinite => Fail::NonFinite,
        ExecError::TypeMismatch(_) => Fail::Type,
        ExecError::UnboundVariable(_) => panic!("generator never leaves variables unbound"),
    }
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

fn is_row(e: &Element) -> bool {
    matches!(e, Element::Row(_))
}

/// Sets never mix rows and values.
fn set(v: Vec<Element>) -> Result<Naive, Fail> {
    let v = sorted(v);
    let rows = v.iter().filter(|e| is_row(e)).count();
    if rows != 0 && rows != v.len() {
        return Err(Fail::Type);
    }
    Ok(Naive::Set(v))
}

fn num(x: f64) -> Result<Naive, Fail> {
    if !x.is_finite() {
        return Err(Fail::NonFinite);
    }
    Ok(Naive::Set(vec![Element::Value(CellValue::Number(x))]))
}

fn holds(op: ComparisonOp, x: &CellValue, bound: &CellValue) -> bool {
    match (x, bound) {
        (CellValue::Number(a), CellValue::Number(b)) => match op {
            ComparisonOp::Lt => a < b,
            ComparisonOp::Le => a <= b,
            ComparisonOp::Gt => a > b,
            ComparisonOp::Ge => a >= b,
            ComparisonOp::Ne => a != b,
        },
        (CellValue::Text { .. }, CellValue::Text { .. }) => op == ComparisonOp::Ne && x != bound,
        _ => false,
    }
}

struct Oracle<'t> {
    t: &'t Table,
    env: Vec<(String, Element)>,
}

impl Oracle<'_> {
    fn cells(&self) -> Vec<CellValue> {
        let mut out = Vec::new();
        for r in 0..self.t.row_count() {
            for c in 0..self.t.col_count() {
                out.push(self.t.cell(r, c).clone());
            }
        }
        out
    }

    fn domain(&self) -> Vec<Element> {
        let n = self.t.row_count();
        let mut d: Vec<Element> = (0..n).map(Element::Row).collect();
        d.extend(self.cells().into_iter().map(Element::Value));
        d.extend((0..n).map(|i| Element::Value(CellValue::Number(i as f64))));
        sorted(d)
    }

    fn relation(&self, name: &RelationName) -> Result<Vec<(Element, Element)>, Fail> {
        let n = self.t.row_count();
        let mut out = Vec::new();
        match name {
            RelationName::Column(c) => {
                let col = (0..self.t.col_count())
                    .find(|&i| self.t.column_names()[i] == *c)
                    .ok_or(Fail::Unknown)?;
                for r in 0..n {
                    out.push((Element::Row(r), Element::Value(self.t.cell(r, col).clone())));
                }
            }
            RelationName::Index => {
                for r in 0..n {
                    out.push((Element::Row(r), Element::Value(CellValue::Number(r as f64))));
                }
            }
            RelationName::Next => {
                for r in 1..n {
                    out.push((Element::Row(r - 1), Element::Row(r)));
                }
            }
            RelationName::Number => {
                for v in self.cells() {
                    if let CellValue::Number(_) = v {
                        out.push((Element::Value(v.clone()), Element::Value(v)));
                    }
                }
            }
            RelationName::Date => {
                for v in self.cells() {
                    if let CellValue::Date { .. } = v {
                        out.push((Element::Value(v.clone()), Element::Value(v)));
                    }
                }
            }
        }
        Ok(sorted(out))
    }

    fn unary(&mut self, z: &LogicalForm) -> Result<Vec<Element>, Fail> {
        match self.eval(z)? {
            Naive::Set(s) => Ok(s),
            Naive::Rel(_) => Err(Fail::Type),
        }
    }

    fn binary(&mut self, z: &LogicalForm) -> Result<Vec<(Element, Element)>, Fail> {
        match self.eval(z)? {
            Naive::Rel(p) => Ok(p),
            Naive::Set(_) => Err(Fail::Type),
        }
    }

    fn numbers(&mut self, z: &LogicalForm) -> Result<Vec<f64>, Fail> {
        let mut out = Vec::new();
        for e in self.unary(z)? {
            match e {
                Element::Value(CellValue::Number(x)) => out.push(x),
                _ => return Err(Fail::NonNumeric),
            }
        }
        Ok(out)
    }

    fn eval(&mut self, z: &LogicalForm) -> Result<Naive, Fail> {
        use LogicalForm as L;
        match z {
            L::Value(v) => Ok(Naive::Set(vec![Element::Value(v.clone())])),
            L::AllRows => set((0..self.t.row_count()).map(Element::Row).collect()),
            L::Var(name) => {
                let (_, e) = self.env.iter().rev().find(|(n, _)| n == name).expect("bound");
                Ok(Naive::Set(vec![e.clone()]))
            }
            L::Relation(name) => Ok(Naive::Rel(self.relation(name)?)),
            L::Reverse(child) => Ok(Naive::Rel(sorted(self.binary(child)?.into_iter().map(|(a, b)| (b, a)).collect()))),
            L::Lambda { var, body } => {
                let mut out = Vec::new();
                for x in self.domain() {
                    self.env.push((var.clone(), x.clone()));
                    let r = self.unary(body);
                    self.env.pop();
                    for e in r? {
                        out.push((e, x.clone()));
                    }
                }
                Ok(Naive::Rel(sorted(out)))
            }
            L::Join { relation, child } => {
                let pairs = self.binary(relation)?;
                let mut out = Vec::new();
                if let L::Comparison { op, value } = child.as_ref() {
                    for (l, r) in pairs {
                        if let Element::Value(v) = &r {
                            if holds(*op, v, value) {
                                out.push(l);
                            }
                        }
                    }
                } else {
                    let targets = self.unary(child)?;
                    for (l, r) in pairs {
                        if targets.contains(&r) {
                            out.push(l);
                        }
                    }
                }
                set(out)
            }
            L::Comparison { op, value } => set(
                self.cells()
                    .into_iter()
                    .filter(|v| holds(*op, v, value))
                    .map(Element::Value)
                    .collect(),
            ),
            L::Merge { op, left, right } => {
                let a = self.unary(left)?;
                let b = self.unary(right)?;
                let out = match op {
                    MergeOp::And => a.into_iter().filter(|e| b.contains(e)).collect(),
                    MergeOp::Or => a.into_iter().chain(b).collect(),
                };
                set(out)
            }
            L::Aggregation { op, child } => {
                if *op == AggregateOp::Count {
                    return num(self.unary(child)?.len() as f64);
                }
                let xs = self.numbers(child)?;
                if xs.is_empty() {
                    return Err(Fail::Empty);
                }
                let mut best = xs[0];
                let mut total = 0.0;
                for &x in &xs {
                    total += x;
                    if (*op == AggregateOp::Max && x > best) || (*op == AggregateOp::Min && x < best) {
                        best = x;
                    }
                }
                num(match op {
                    AggregateOp::Max | AggregateOp::Min => best,
                    AggregateOp::Sum => total,
                    AggregateOp::Avg => total / xs.len() as f64,
                    AggregateOp::Count => unreachable!(),
                })
            }
            L::Arithmetic { op, left, right } => {
                let a = self.numbers(left).map_err(|_| Fail::NonSingleton)?;
                let b = self.numbers(right).map_err(|_| Fail::NonSingleton)?;
                if a.len() != 1 || b.len() != 1 {
                    return Err(Fail::NonSingleton);
                }
                num(match op {
                    ArithmeticOp::Plus => a[0] + b[0],
                    ArithmeticOp::Minus => a[0] - b[0],
                })
            }
            L::Superlative { op, value, relation } => {
                let candidates = self.unary(value)?;
                let pairs = self.binary(relation)?;
                let mut keyed: Vec<(f64, Element)> = Vec::new();
                for e in candidates {
                    let keys: Vec<f64> = pairs
                        .iter()
                        .filter(|(l, _)| *l == e)
                        .filter_map(|(_, r)| match r {
                            Element::Value(CellValue::Number(k)) => Some(*k),
                            _ => None,
                        })
                        .collect();
                    let key = match op {
                        SuperlativeOp::Argmax => keys.iter().copied().reduce(f64::max),
                        SuperlativeOp::Argmin => keys.iter().copied().reduce(f64::min),
                    };
                    if let Some(k) = key {
                        keyed.push((k, e));
                    }
                }
                let target = match op {
                    SuperlativeOp::Argmax => keyed.iter().map(|p| p.0).reduce(f64::max),
                    SuperlativeOp::Argmin => keyed.iter().map(|p| p.0).reduce(f64::min),
                };
                // Candidates are sorted, so the first hit is the earliest.
                set(keyed.into_iter().filter(|(k, _)| Some(*k) == target).take(1).map(|(_, e)| e).collect())
            }
        }
    }
}

fn to_denotation(n: Naive) -> Denotation {
    match n {
        Naive::Rel(p) => Denotation::PairSet(p.into_iter().collect()),
        Naive::Set(s) if s.is_empty() => Denotation::empty(),
        Naive::Set(s) if is_row(&s[0]) => Denotation::RowSet(
            s.into_iter()
                .map(|e| match e {
                    Element::Row(r) => r,
                    _ => unreachable!(),
                })
                .collect(),
        ),
        Naive::Set(s) => Denotation::EntitySet(
            s.into_iter()
                .map(|e| match e {
                    Element::Value(v) => v,
                    _ => unreachable!(),
                })
                .collect(),
        ),
    }
}

pub fn oracle(z: &LogicalForm, t: &Table) -> Result<Denotation, Fail> {
    // Every column a form names must exist, reachable or not.
    let mut stack = vec![z];
    while let Some(node) = stack.pop() {
        if let LogicalForm::Relation(RelationName::Column(c)) = node {
            if !t.column_names().contains(c) {
                return Err(Fail::Unknown);
            }
        }
        stack.extend(node.children());
    }
    Oracle { t, env: Vec::new() }.eval(z).map(to_denotation)
}

fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let rows = rng.gen_range(0..=6);
    let cols = rng.gen_range(1..=4);
    let header: Vec<String> = (0..cols).map(|c| format!("c{c}")).collect();
    // Per column: numeric, text, or mixed.
    let kinds: Vec<u8> = (0..cols).map(|_| rng.gen_range(0..3)).collect();
    let body: Vec<Vec<String>> = (0..rows)
        .map(|_| {
            kinds
                .iter()
                .map(|&k| {
                    let numeric = k == 0 || (k == 2 && rng.gen_bool(0.5));
                    if numeric {
                        rng.gen_range(0..8).to_string()
                    } else {
                        ["a", "b", "c"][rng.gen_range(0..3)].to_string()
                    }
                })
                .collect()
        })
        .collect();
    Table::from_raw(&header, &body).expect("rectangular")
}

/// Builds typed trees. `d` is the number of operator levels still allowed:
/// Join, Aggregation, Lambda, Arithmetic, Merge and Superlative each use one;
/// leaves and reversed primitive relations use none.
struct Gen<'a> {
    rng: ChaCha8Rng,
    t: &'a Table,
}

impl Gen<'_> {
    fn column(&mut self) -> String {
        // A rare unknown column exercises the error path.
        if self.rng.gen_bool(0.02) {
            return "missing".into();
        }
        let names = self.t.column_names();
        names[self.rng.gen_range(0..names.len())].clone()
    }

    fn some_value(&mut self) -> CellValue {
        if self.t.row_count() > 0 && self.rng.gen_bool(0.7) {
            let r = self.rng.gen_range(0..self.t.row_count());
            let c = self.rng.gen_range(0..self.t.col_count());
            self.t.cell(r, c).clone()
        } else {
            CellValue::Number(self.rng.gen_range(0..8) as f64)
        }
    }

    fn comparison(&mut self) -> LogicalForm {
        let op = [ComparisonOp::Lt, ComparisonOp::Le, ComparisonOp::Gt, ComparisonOp::Ge, ComparisonOp::Ne]
            [self.rng.gen_range(0..5)];
        let v = self.some_value();
        cmp(op, v)
    }

    /// A relation from rows to keys, for superlatives.
    fn key_relation(&mut self, d: usize) -> LogicalForm {
        let options = match d {
            0 | 1 => 2,
            2 => 3,
            _ => 4,
        };
        match self.rng.gen_range(0..options) {
            0 => rel(RelationName::Index),
            1 => column(&self.column()),
            2 => lambda("x", join(column(&self.column()), var("x"))),
            _ => {
                let (a, b) = (self.column(), self.column());
                lambda("x", merge(MergeOp::Or, join(column(&a), var("x")), join(column(&b), var("x"))))
            }
        }
    }

    fn rows(&mut self, d: usize) -> LogicalForm {
        if d == 0 {
            return LogicalForm::AllRows;
        }
        match self.rng.gen_range(0..9) {
            0 => LogicalForm::AllRows,
            1 => {
                let v = self.some_value();
                join(column(&self.column()), value(v))
            }
            2 => {
                let c = self.comparison();
                join(column(&self.column()), c)
            }
            3 => {
                let c = self.column();
                join(column(&c), self.values(d - 1))
            }
            4 => join(rel(RelationName::Next), self.rows(d - 1)),
            5 => join(reverse(rel(RelationName::Next)), self.rows(d - 1)),
            6 => {
                let op = if self.rng.gen_bool(0.5) { MergeOp::And } else { MergeOp::Or };
                merge(op, self.rows(d - 1), self.rows(d - 1))
            }
            7 => {
                let op = if self.rng.gen_bool(0.5) { SuperlativeOp::Argmax } else { SuperlativeOp::Argmin };
                sup(op, self.rows(d - 1), self.key_relation(d - 1))
            }
            _ if d >= 3 => {
                // λx[c.x] used as a relation, a composable chain.
                let c = self.column();
                join(lambda("x", join(column(&c), var("x"))), self.values(d - 3))
            }
            _ => LogicalForm::AllRows,
        }
    }

    fn values(&mut self, d: usize) -> LogicalForm {
        if d == 0 {
            return if self.rng.gen_bool(0.8) {
                value(self.some_value())
            } else {
                self.comparison()
            };
        }
        match self.rng.gen_range(0..10) {
            0 => value(self.some_value()),
            1 | 2 => {
                let c = self.column();
                join(reverse(column(&c)), self.rows(d - 1))
            }
            3 => join(reverse(rel(RelationName::Index)), self.rows(d - 1)),
            4 => {
                let child = if self.rng.gen_bool(0.7) { self.rows(d - 1) } else { self.values(d - 1) };
                agg(AggregateOp::Count, child)
            }
            5 => {
                let op = [AggregateOp::Max, AggregateOp::Min, AggregateOp::Sum, AggregateOp::Avg][self.rng.gen_range(0..4)];
                agg(op, self.values(d - 1))
            }
            6 => {
                let op = if self.rng.gen_bool(0.5) { ArithmeticOp::Plus } else { ArithmeticOp::Minus };
                arith(op, self.values(d - 1), self.values(d - 1))
            }
            7 => {
                let op = if self.rng.gen_bool(0.5) { MergeOp::And } else { MergeOp::Or };
                merge(op, self.values(d - 1), self.values(d - 1))
            }
            8 => join(rel(RelationName::Number), self.values(d - 1)),
            _ if d >= 3 => {
                // R[λx[c.x]]: a reversed composable chain.
                let c = self.column();
                join(reverse(lambda("x", join(column(&c), var("x")))), self.rows(d - 3))
            }
            _ => {
                let c = self.column();
                join(reverse(column(&c)), self.rows(d - 1))
            }
        }
    }
}

/// Operator nesting as the generator counts it.
fn op_depth(z: &LogicalForm) -> usize {
    use LogicalForm as L;
    let below = |c: &[&LogicalForm]| c.iter().map(|c| op_depth(c)).max().unwrap_or(0);
    match z {
        L::Reverse(inner) => op_depth(inner),
        L::Join { .. } | L::Aggregation { .. } | L::Lambda { .. } | L::Arithmetic { .. } | L::Merge { .. } | L::Superlative { .. } => {
            1 + below(&z.children())
        }
        _ => 0,
    }
}

/// Outcome of a random comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub trees: usize,
    /// Trees that executed without error.
    pub executed: usize,
    /// Distinct denotation kinds seen among executed trees.
    pub kinds: usize,
}

/// Compares executor and oracle on `trees` random forms of operator depth
/// at most 3, over random tables of at most 6 rows and 4 columns (ten
/// forms per table). Returns the first disagreement as an error.
pub fn compare_random(trees: usize, seed: u64) -> Result<OracleRun, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut executed = 0;
    let mut kinds = BTreeSet::new();
    let mut done = 0;
    while done < trees {
        let table = random_table(&mut rng);
        for _ in 0..10.min(trees - done) {
            let mut gen = Gen {
                rng: ChaCha8Rng::seed_from_u64(rng.gen()),
                t: &table,
            };
            let z = if gen.rng.gen_bool(0.5) { gen.rows(3) } else { gen.values(3) };
            if op_depth(&z) > 3 {
                return Err(format!("generator exceeded depth 3: {}", z.serialize()));
            }
            let got = execute(&z, &table).map_err(|e| class(&e));
            let want = oracle(&z, &table);
            if got != want {
                return Err(format!("{}: executor {got:?}, oracle {want:?}, table {table:?}", z.serialize()));
            }
            if let Ok(d) = &got {
                executed += 1;
                kinds.insert(match d {
                    Denotation::EntitySet(_) => 0,
                    Denotation::RowSet(_) => 1,
                    Denotation::PairSet(_) => 2,
                });
            }
            done += 1;
        }
    }
    Ok(OracleRun {
        trees,
        executed,
        kinds: kinds.len(),
    })
}
