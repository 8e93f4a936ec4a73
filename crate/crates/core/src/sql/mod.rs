//! The SQL dialect: syntax tree, parser, canonical renderer, and the
//! generator that builds queries from matched English.

pub mod ast;
mod desugar;
mod generate;
mod parser;
mod render;

pub use ast::*;
pub use desugar::desugar_contains;
pub use generate::{
    bind_literals, build_ast, classify, generate, BoundBy, BoundLiteral, GenerateError, QueryClass,
};
pub use parser::{is_reserved, parse_sql, SyntaxError};
pub use render::{render_inline, render_sql};
