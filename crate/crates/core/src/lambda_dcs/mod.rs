//! Lambda DCS logical forms: syntax tree, text parser and table executor.

mod ast;
mod exec;
mod parser;

pub use ast::{
    build, AggregateOp, ArithmeticOp, ComparisonOp, LogicalForm, MergeOp, RelationName, SuperlativeOp,
};
pub use exec::{active_domain, answer_of, compare_values, denotation_values, execute, Denotation, Element, ExecError};
pub use parser::{parse_lf, split_identifier, LfParseError};
