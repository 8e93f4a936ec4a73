//! Core of the Cyrus SQL tutor: catalog, English preprocessing, schema
//! matching, SQL syntax, the relational evaluator and view comparison.

pub mod catalog;
pub mod engine;
pub mod fixture;
pub mod matcher;
pub mod sql;
pub mod text;
pub mod translate;
pub mod value;
