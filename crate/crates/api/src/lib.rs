//! Bodies exchanged with the tutor service. All are JSON.

use serde::{Deserialize, Serialize};

pub use cyrus_core::catalog::SchemaDoc;
pub use cyrus_core::engine::ResultTable;
pub use cyrus_core::sql::QueryClass;
pub use cyrus_core::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tutor,
    Assessment,
}

/// An instructor-written exercise. `difficulty` is 1, 2 or 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub id: String,
    pub difficulty: u8,
    pub prompt_en: String,
    pub reference_sql: String,
    pub points: u32,
}

pub fn difficulty_label(difficulty: u8) -> Option<&'static str> {
    match difficulty {
        1 => Some("easy"),
        2 => Some("medium"),
        3 => Some("hard"),
        _ => None,
    }
}

/// What a student sees of an assignment. The reference query stays hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentView {
    pub id: String,
    pub difficulty: u8,
    pub label: String,
    pub prompt_en: String,
    pub points: u32,
}

impl From<&Assignment> for AssignmentView {
    fn from(a: &Assignment) -> Self {
        Self {
            id: a.id.clone(),
            difficulty: a.difficulty,
            label: difficulty_label(a.difficulty)
                .unwrap_or("unknown")
                .to_string(),
            prompt_en: a.prompt_en.clone(),
            points: a.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub mode: Mode,
    pub database: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Grade against these instead of the database's own pack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignments: Option<Vec<Assignment>>,
}

impl CreateSession {
    pub fn tutor(database: impl Into<String>) -> Self {
        Self {
            mode: Mode::Tutor,
            database: database.into(),
            difficulty: None,
            delta: None,
            tau: None,
            assignments: None,
        }
    }

    pub fn assessment(database: impl Into<String>, difficulty: u8) -> Self {
        Self {
            mode: Mode::Assessment,
            difficulty: Some(difficulty),
            ..Self::tutor(database)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub mode: Mode,
    pub database: String,
    pub difficulty: Option<u8>,
    pub earned: u32,
    pub possible: u32,
    pub assignments: Vec<AssignmentView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub sql: String,
    pub class: QueryClass,
    pub result: ResultTable,
    /// Terms, table candidates, Ψ scores and the chosen tables.
    pub diagnostics: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqlRequest {
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub assignment: String,
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub assignment: String,
    pub correct: bool,
    pub earned_points: u32,
    /// Whether `expected` carries the reference view.
    pub expected_shown: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ResultTable>,
    /// Why the submission could not run, when it could not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradeStatus {
    Graded,
    Ungraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentScore {
    pub assignment: String,
    pub points: u32,
    pub status: GradeStatus,
    pub correct: Option<bool>,
    pub earned: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub earned: u32,
    pub possible: u32,
    pub per_assignment: Vec<AssignmentScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatabaseInfo {
    pub id: String,
    pub tables: Vec<String>,
}

/// Error body of every failed request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

impl ApiError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)?;
        if let Some(h) = &self.hint {
            write!(f, "\n{h}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ApiError {}
