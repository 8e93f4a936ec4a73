//! English in, SQL and its result out.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::DatabaseCatalog;
use crate::engine::{self, EngineError, ResultTable};
use crate::matcher::{
    match_query, MatchConfig, MatchError, MatchResult, TableCandidate, TableScore, Term,
};
use crate::sql::{generate, render_sql, BoundLiteral, GenerateError, Query, QueryClass};
use crate::text::{analyze, TextConfig, TextError};

const RESTATE: &str = "Please restate the query differently, naming the table or columns you mean.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    /// The generated query did not bind; a generator bug rather than a user error.
    #[error("generated query is invalid: {0}")]
    Invalid(EngineError),
}

impl TranslateError {
    pub fn code(&self) -> &'static str {
        match self {
            TranslateError::Text(TextError::EmptyQuery) => "EmptyQuery",
            TranslateError::Match(MatchError::NoTableMatch) => "NoTableMatch",
            TranslateError::Generate(GenerateError::UnboundLiteral { .. }) => "UnboundLiteral",
            TranslateError::Generate(GenerateError::AmbiguousLiteral { .. }) => "AmbiguousLiteral",
            TranslateError::Invalid(_) => "InvalidTranslation",
        }
    }

    /// What to tell the student.
    pub fn hint(&self) -> String {
        match self {
            TranslateError::Text(_) => "Type or say a question about the database.".to_string(),
            TranslateError::Generate(GenerateError::UnboundLiteral { literal }) => {
                format!("Say which column '{literal}' belongs to, for example \"composer {literal}\". {RESTATE}")
            }
            TranslateError::Generate(GenerateError::AmbiguousLiteral { literal, columns }) => {
                format!(
                    "'{literal}' could be {}; name the column. {RESTATE}",
                    columns.join(" or ")
                )
            }
            _ => RESTATE.to_string(),
        }
    }
}

/// What the matcher saw, for display next to the answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t_n: Vec<Term>,
    pub t_p: Vec<Term>,
    pub candidates: Vec<TableCandidate>,
    pub scores: Vec<TableScore>,
    pub selected: Vec<String>,
    pub class: QueryClass,
    pub literals: Vec<BoundLiteral>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Translation {
    pub sql: String,
    #[serde(skip)]
    pub ast: Query,
    pub class: QueryClass,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default)]
pub struct Translator {
    pub text: TextConfig,
    pub config: MatchConfig,
}

impl Translator {
    pub fn new(config: MatchConfig) -> Self {
        Self {
            text: TextConfig::default(),
            config,
        }
    }

    pub fn analyze_and_match(
        &self,
        catalog: &DatabaseCatalog,
        text: &str,
    ) -> Result<(crate::text::TaggedQuery, MatchResult), TranslateError> {
        let q = analyze(text, &self.text, catalog)?;
        let m = match_query(&q, catalog, &self.config)?;
        Ok((q, m))
    }

    pub fn translate(
        &self,
        catalog: &DatabaseCatalog,
        text: &str,
    ) -> Result<Translation, TranslateError> {
        let (q, m) = self.analyze_and_match(catalog, text)?;
        let (class, ast, literals) = generate(&q, &m, catalog, &self.config)?;
        engine::check(&ast, catalog).map_err(TranslateError::Invalid)?;
        let diagnostics = Diagnostics {
            selected: m.f_t.iter().map(|s| s.table.clone()).collect(),
            t_n: m.t_n,
            t_p: m.t_p,
            candidates: m.l_t,
            scores: m.scores,
            class,
            literals,
        };
        Ok(Translation {
            sql: render_sql(&ast),
            ast,
            class,
            diagnostics,
        })
    }

    /// Translation followed by execution.
    pub fn translate_and_run(
        &self,
        catalog: &DatabaseCatalog,
        text: &str,
    ) -> Result<(Translation, ResultTable), TranslateError> {
        let t = self.translate(catalog, text)?;
        let table = engine::execute(&t.ast, catalog).map_err(TranslateError::Invalid)?;
        Ok((t, table))
    }
}
