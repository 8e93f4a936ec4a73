//! Evaluation of queries over catalog instances, and view comparison.

mod eval;
mod table;

pub use eval::{check, execute, EngineError};
pub use table::{natural_join, result_equal, result_equal_with, ResultTable, Semantics};
