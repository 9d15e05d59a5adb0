use std::fmt;

use crate::table::CellValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggregateOp {
    Count,
    Max,
    Min,
    Sum,
    Avg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithmeticOp {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuperlativeOp {
    Argmax,
    Argmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonOp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl AggregateOp {
    pub const ALL: [AggregateOp; 5] = [Self::Count, Self::Max, Self::Min, Self::Sum, Self::Avg];

    pub fn name(self) -> &'static str {
        match self {
            Self::Count => "count",
            Self::Max => "max",
            Self::Min => "min",
            Self::Sum => "sum",
            Self::Avg => "avg",
        }
    }
}

impl ArithmeticOp {
    pub fn name(self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
        }
    }
}

impl MergeOp {
    pub fn name(self) -> &'static str {
        match self {
            Self::And => "and",
            Self::Or => "or",
        }
    }
}

impl SuperlativeOp {
    pub fn name(self) -> &'static str {
        match self {
            Self::Argmax => "argmax",
            Self::Argmin => "argmin",
        }
    }
}

impl ComparisonOp {
    pub const ALL: [ComparisonOp; 5] = [Self::Lt, Self::Le, Self::Gt, Self::Ge, Self::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Gt => ">",
            Self::Ge => ">=",
            Self::Ne => "!=",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lt => "lt",
            Self::Le => "le",
            Self::Gt => "gt",
            Self::Ge => "ge",
            Self::Ne => "ne",
        }
    }
}

/// Binary relations: table columns plus the builtins.
///
/// `Index` maps a row to its 0-based position, `Next` maps a row to the row
/// after it, and `Number` / `Date` relate a typed cell value to itself,
/// acting as the explicit type conversions of the original grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelationName {
    Column(String),
    Index,
    Next,
    Number,
    Date,
}

impl RelationName {
    pub fn builtin(name: &str) -> Option<RelationName> {
        match name {
            "index" => Some(RelationName::Index),
            "next" => Some(RelationName::Next),
            "number" => Some(RelationName::Number),
            "date" => Some(RelationName::Date),
            _ => None,
        }
    }

    pub fn is_type_conversion(&self) -> bool {
        matches!(self, RelationName::Number | RelationName::Date)
    }
}

/// A Lambda DCS logical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogicalForm {
    Aggregation {
        op: AggregateOp,
        child: Box<LogicalForm>,
    },
    Join {
        relation: Box<LogicalForm>,
        child: Box<LogicalForm>,
    },
    Reverse(Box<LogicalForm>),
    Lambda {
        var: String,
        body: Box<LogicalForm>,
    },
    Arithmetic {
        op: ArithmeticOp,
        left: Box<LogicalForm>,
        right: Box<LogicalForm>,
    },
    Merge {
        op: MergeOp,
        left: Box<LogicalForm>,
        right: Box<LogicalForm>,
    },
    Superlative {
        op: SuperlativeOp,
        value: Box<LogicalForm>,
        relation: Box<LogicalForm>,
    },
    Comparison {
        op: ComparisonOp,
        value: CellValue,
    },
    Relation(RelationName),
    Value(CellValue),
    Var(String),
    /// The set of all table rows.
    AllRows,
}

/// Shorthand constructors, mostly for tests and the candidate generator.
pub mod build {
    use super::*;

    pub fn column(name: &str) -> LogicalForm {
        LogicalForm::Relation(RelationName::Column(name.to_string()))
    }
    pub fn rel(name: RelationName) -> LogicalForm {
        LogicalForm::Relation(name)
    }
    pub fn value(v: CellValue) -> LogicalForm {
        LogicalForm::Value(v)
    }
    pub fn text(s: &str) -> LogicalForm {
        LogicalForm::Value(CellValue::text(s))
    }
    pub fn num(n: f64) -> LogicalForm {
        LogicalForm::Value(CellValue::number(n).expect("finite"))
    }
    pub fn var(s: &str) -> LogicalForm {
        LogicalForm::Var(s.to_string())
    }
    pub fn join(relation: LogicalForm, child: LogicalForm) -> LogicalForm {
        LogicalForm::Join {
            relation: Box::new(relation),
            child: Box::new(child),
        }
    }
    pub fn reverse(child: LogicalForm) -> LogicalForm {
        LogicalForm::Reverse(Box::new(child))
    }
    pub fn lambda(var: &str, body: LogicalForm) -> LogicalForm {
        LogicalForm::Lambda {
            var: var.to_string(),
            body: Box::new(body),
        }
    }
    pub fn agg(op: AggregateOp, child: LogicalForm) -> LogicalForm {
        LogicalForm::Aggregation { op, child: Box::new(child) }
    }
    pub fn arith(op: ArithmeticOp, left: LogicalForm, right: LogicalForm) -> LogicalForm {
        LogicalForm::Arithmetic {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
    pub fn merge(op: MergeOp, left: LogicalForm, right: LogicalForm) -> LogicalForm {
        LogicalForm::Merge {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
    pub fn sup(op: SuperlativeOp, value: LogicalForm, relation: LogicalForm) -> LogicalForm {
        LogicalForm::Superlative {
            op,
            value: Box::new(value),
            relation: Box::new(relation),
        }
    }
    pub fn cmp(op: ComparisonOp, value: CellValue) -> LogicalForm {
        LogicalForm::Comparison { op, value }
    }
}

impl LogicalForm {
    pub fn children(&self) -> Vec<&LogicalForm> {
        match self {
            LogicalForm::Aggregation { child, .. } => vec![child],
            LogicalForm::Join { relation, child } => vec![relation, child],
            LogicalForm::Reverse(child) => vec![child],
            LogicalForm::Lambda { body, .. } => vec![body],
            LogicalForm::Arithmetic { left, right, .. } | LogicalForm::Merge { left, right, .. } => vec![left, right],
            LogicalForm::Superlative { value, relation, .. } => vec![value, relation],
            LogicalForm::Comparison { .. }
            | LogicalForm::Relation(_)
            | LogicalForm::Value(_)
            | LogicalForm::Var(_)
            | LogicalForm::AllRows => vec![],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Pre-order search.
    pub fn any(&self, pred: &dyn Fn(&LogicalForm) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any(pred))
    }

    /// Canonical text form; [`super::parse_lf`] reads it back unchanged.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

fn write_value(f: &mut fmt::Formatter<'_>, v: &CellValue) -> fmt::Result {
    match v {
        CellValue::Number(_) => f.write_str(&v.surface()),
        CellValue::Text { normalized, .. } => write_quoted(f, normalized),
        CellValue::Date { .. } => write_quoted(f, &v.surface()),
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationName::Column(name) => {
                if RelationName::builtin(name).is_some() || super::parser::is_keyword(name) {
                    write!(f, "col:{name}")
                } else {
                    f.write_str(name)
                }
            }
            RelationName::Index => f.write_str("Index"),
            RelationName::Next => f.write_str("Next"),
            RelationName::Number => f.write_str("Number"),
            RelationName::Date => f.write_str("Date"),
        }
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalForm::Aggregation { op, child } => write!(f, "{}({child})", op.name()),
            LogicalForm::Join { relation, child } => write!(f, "{relation}.{child}"),
            LogicalForm::Reverse(child) => write!(f, "R[{child}]"),
            LogicalForm::Lambda { var, body } => write!(f, "λ{var}[{body}]"),
            LogicalForm::Arithmetic { op, left, right } => write!(f, "{}({left},{right})", op.name()),
            LogicalForm::Merge { op, left, right } => write!(f, "{}({left},{right})", op.name()),
            LogicalForm::Superlative { op, value, relation } => write!(f, "{}({value},{relation})", op.name()),
            LogicalForm::Comparison { op, value } => {
                f.write_str(op.symbol())?;
                write_value(f, value)
            }
            LogicalForm::Relation(name) => write!(f, "{name}"),
            LogicalForm::Value(v) => write_value(f, v),
            LogicalForm::Var(v) => f.write_str(v),
            LogicalForm::AllRows => f.write_str("AllRows"),
        }
    }
}
