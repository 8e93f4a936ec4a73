//! Sessions, assignments and grading, independent of transport.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use cyrus_api::{
    difficulty_label, AnswerResponse, ApiError, Assignment, AssignmentScore, AssignmentView,
    CreateSession, DatabaseInfo, GradeStatus, Mode, Score, SessionInfo, TranslateResponse,
};
use cyrus_core::catalog::{CatalogError, DatabaseCatalog, SchemaDoc, Vocabulary};
use cyrus_core::engine::{execute, result_equal_with, EngineError, ResultTable, Semantics};
use cyrus_core::matcher::{ConfigError, MatchConfig};
use cyrus_core::sql::{parse_sql, SyntaxError};
use cyrus_core::translate::{TranslateError, Translator};
use thiserror::Error;
use tracing::{info, warn};

use crate::store::{read_events, EventLog, Interaction, InteractionKind, LogEvent};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no database named '{0}'")]
    UnknownDatabase(String),
    #[error("assessment sessions need a difficulty (1, 2 or 3)")]
    MissingDifficulty,
    #[error("difficulty must be 1, 2 or 3, got {0}")]
    InvalidDifficulty(u8),
    #[error("no session '{0}'")]
    UnknownSession(String),
    #[error("{0}")]
    ModeViolation(&'static str),
    #[error("could not translate the query: {0}")]
    TranslationFailed(TranslateError),
    #[error("syntax error at line {}, column {}: found {}, expected {}", .0.line, .0.column, .0.found, .0.expected.join(" or "))]
    Syntax(SyntaxError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no assignment '{0}' in this session")]
    UnknownAssignment(String),
    #[error("assignment '{0}' has already been graded")]
    DuplicateSubmission(String),
    #[error("assignment '{id}': {reason}")]
    InvalidAssignment { id: String, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Io(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownDatabase(_) => "UnknownDatabase",
            ServiceError::MissingDifficulty => "MissingDifficulty",
            ServiceError::InvalidDifficulty(_) => "InvalidDifficulty",
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::ModeViolation(_) => "ModeViolation",
            ServiceError::TranslationFailed(_) => "TranslationFailed",
            ServiceError::Syntax(_) => "SyntaxError",
            ServiceError::Engine(e) => match e {
                EngineError::UnknownTable { .. } => "UnknownTable",
                EngineError::UnknownColumn { .. } => "UnknownColumn",
                EngineError::TypeMismatch { .. } => "TypeMismatch",
                EngineError::NotGrouped { .. } => "NotGrouped",
                EngineError::DuplicateColumn { .. } => "DuplicateColumn",
            },
            ServiceError::UnknownAssignment(_) => "UnknownAssignment",
            ServiceError::DuplicateSubmission(_) => "DuplicateSubmission",
            ServiceError::InvalidAssignment { .. } => "InvalidAssignment",
            ServiceError::Config(_) => "InvalidConfig",
            ServiceError::Catalog(_) => "CatalogError",
            ServiceError::Io(_) => "IoError",
        }
    }

    pub fn to_api(&self) -> ApiError {
        let mut e = ApiError::new(self.code(), self.to_string());
        if let ServiceError::TranslationFailed(t) = self {
            e.message = format!("{} ({})", self, t.code());
            e = e.with_hint(t.hint());
        }
        e
    }
}

impl From<SyntaxError> for ServiceError {
    fn from(e: SyntaxError) -> Self {
        ServiceError::Syntax(e)
    }
}

#[derive(Debug, Clone)]
pub struct TutorConfig {
    /// One directory per database: schema.json, a CSV per table, and
    /// optionally vocabulary.json and assignments.json.
    pub databases: Vec<PathBuf>,
    /// Replaces every database's own vocabulary.
    pub vocabulary: Option<PathBuf>,
    pub matching: MatchConfig,
    pub semantics: Semantics,
    /// Graded attempts allowed per assignment.
    pub attempts: u32,
    pub log: Option<PathBuf>,
}

impl Default for TutorConfig {
    fn default() -> Self {
        Self {
            databases: Vec::new(),
            vocabulary: None,
            matching: MatchConfig::default(),
            semantics: Semantics::Bag,
            attempts: 1,
            log: None,
        }
    }
}

/// Database directories under `root`, in name order.
pub fn discover(root: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    let entries = std::fs::read_dir(root)
        .map_err(|e| ServiceError::Io(format!("{}: {e}", root.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("schema.json").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub struct Database {
    pub catalog: DatabaseCatalog,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone)]
struct Attempt {
    correct: bool,
    earned: u32,
    count: u32,
}

#[derive(Debug)]
struct Session {
    id: String,
    mode: Mode,
    database: String,
    difficulty: Option<u8>,
    matching: MatchConfig,
    assignments: Vec<Assignment>,
    attempts: BTreeMap<String, Attempt>,
    history: Vec<Interaction>,
}

impl Session {
    fn possible(&self) -> u32 {
        self.assignments.iter().map(|a| a.points).sum()
    }

    fn earned(&self) -> u32 {
        self.attempts.values().map(|a| a.earned).sum()
    }

    fn info(&self) -> SessionInfo {
        SessionInfo {
            id: self.id.clone(),
            mode: self.mode,
            database: self.database.clone(),
            difficulty: self.difficulty,
            earned: self.earned(),
            possible: self.possible(),
            assignments: self.assignments.iter().map(AssignmentView::from).collect(),
        }
    }

    fn score(&self) -> Score {
        Score {
            earned: self.earned(),
            possible: self.possible(),
            per_assignment: self
                .assignments
                .iter()
                .map(|a| match self.attempts.get(&a.id) {
                    Some(t) => AssignmentScore {
                        assignment: a.id.clone(),
                        points: a.points,
                        status: GradeStatus::Graded,
                        correct: Some(t.correct),
                        earned: t.earned,
                    },
                    None => AssignmentScore {
                        assignment: a.id.clone(),
                        points: a.points,
                        status: GradeStatus::Ungraded,
                        correct: None,
                        earned: 0,
                    },
                })
                .collect(),
        }
    }
}

pub struct Tutor {
    databases: BTreeMap<String, Database>,
    config: TutorConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    log: Option<EventLog>,
}

fn check_assignment(a: &Assignment, catalog: &DatabaseCatalog) -> Result<(), ServiceError> {
    let invalid = |reason: String| ServiceError::InvalidAssignment {
        id: a.id.clone(),
        reason,
    };
    if difficulty_label(a.difficulty).is_none() {
        return Err(invalid(format!(
            "difficulty {} is not 1, 2 or 3",
            a.difficulty
        )));
    }
    if a.points == 0 {
        return Err(invalid("points must be positive".into()));
    }
    let q = parse_sql(&a.reference_sql).map_err(|e| invalid(format!("reference query: {e}")))?;
    execute(&q, catalog).map_err(|e| invalid(format!("reference query: {e}")))?;
    Ok(())
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Tutor {
    /// Loads every database, validates its assignments and restores
    /// sessions from the log when one exists.
    pub fn open(config: TutorConfig) -> Result<Self, ServiceError> {
        config.matching.validate()?;
        let vocabulary = match &config.vocabulary {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ServiceError::Io(format!("{}: {e}", p.display())))?;
                Some(Vocabulary::from_json(&text)?)
            }
            None => None,
        };
        let mut databases = BTreeMap::new();
        for dir in &config.databases {
            let mut catalog = DatabaseCatalog::load_dir(dir)?;
            if let Some(v) = &vocabulary {
                catalog = catalog.with_vocabulary(v.clone());
            }
            let pack = dir.join("assignments.json");
            let assignments: Vec<Assignment> = if pack.is_file() {
                let text = std::fs::read_to_string(&pack)
                    .map_err(|e| ServiceError::Io(format!("{}: {e}", pack.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| ServiceError::Io(format!("{}: {e}", pack.display())))?
            } else {
                Vec::new()
            };
            for a in &assignments {
                check_assignment(a, &catalog)?;
            }
            info!(
                database = catalog.name(),
                assignments = assignments.len(),
                "loaded database"
            );
            databases.insert(
                catalog.name().to_string(),
                Database {
                    catalog,
                    assignments,
                },
            );
        }
        let mut tutor = Self {
            databases,
            sessions: RwLock::new(HashMap::new()),
            log: None,
            config,
        };
        if let Some(path) = tutor.config.log.clone() {
            if path.is_file() {
                let events = read_events(&path).map_err(|e| ServiceError::Io(e.to_string()))?;
                tutor.restore(&events);
            }
            tutor.log = Some(
                EventLog::open(&path)
                    .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?,
            );
        }
        Ok(tutor)
    }

    /// In-memory tutor over already loaded databases.
    pub fn from_databases(
        databases: Vec<Database>,
        config: TutorConfig,
    ) -> Result<Self, ServiceError> {
        config.matching.validate()?;
        let mut map = BTreeMap::new();
        for db in databases {
            for a in &db.assignments {
                check_assignment(a, &db.catalog)?;
            }
            map.insert(db.catalog.name().to_string(), db);
        }
        let log = match &config.log {
            Some(p) => Some(EventLog::open(p).map_err(|e| ServiceError::Io(e.to_string()))?),
            None => None,
        };
        Ok(Self {
            databases: map,
            config,
            sessions: RwLock::new(HashMap::new()),
            log,
        })
    }

    fn restore(&mut self, events: &[LogEvent]) {
        let sessions = self.sessions.get_mut().unwrap_or_else(|e| e.into_inner());
        for e in events {
            match e {
                LogEvent::SessionStarted {
                    session,
                    mode,
                    database,
                    difficulty,
                    delta,
                    tau,
                    assignments,
                } => {
                    sessions.insert(
                        session.clone(),
                        Arc::new(Mutex::new(Session {
                            id: session.clone(),
                            mode: *mode,
                            database: database.clone(),
                            difficulty: *difficulty,
                            matching: MatchConfig {
                                delta: *delta,
                                tau: *tau,
                            },
                            assignments: assignments.clone(),
                            attempts: BTreeMap::new(),
                            history: Vec::new(),
                        })),
                    );
                }
                LogEvent::Interaction { session, record } => {
                    if let Some(s) = sessions.get(session) {
                        lock(s).history.push(record.clone());
                    }
                }
                LogEvent::Submission {
                    session,
                    assignment,
                    correct,
                    earned,
                    ..
                } => {
                    if let Some(s) = sessions.get(session) {
                        let mut s = lock(s);
                        let count = s.attempts.get(assignment).map_or(0, |a| a.count);
                        s.attempts.insert(
                            assignment.clone(),
                            Attempt {
                                correct: *correct,
                                earned: *earned,
                                count: count + 1,
                            },
                        );
                    }
                }
            }
        }
        info!(sessions = sessions.len(), "restored sessions from log");
    }

    fn record(&self, event: LogEvent) {
        if let Some(log) = &self.log {
            if let Err(e) = log.append(&event) {
                warn!(error = %e, "could not append to the session log");
            }
        }
    }

    /// Flushes the log to disk.
    pub fn flush(&self) {
        if let Some(log) = &self.log {
            if let Err(e) = log.sync() {
                warn!(error = %e, "could not sync the session log");
            }
        }
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log.as_ref().map(|l| l.path())
    }

    pub fn databases(&self) -> Vec<DatabaseInfo> {
        self.databases
            .iter()
            .map(|(id, db)| DatabaseInfo {
                id: id.clone(),
                tables: db.catalog.schemas().map(|s| s.name.clone()).collect(),
            })
            .collect()
    }

    pub fn database(&self, id: &str) -> Result<&Database, ServiceError> {
        self.databases
            .get(id)
            .ok_or_else(|| ServiceError::UnknownDatabase(id.to_string()))
    }

    pub fn schema(&self, id: &str) -> Result<SchemaDoc, ServiceError> {
        Ok(self.database(id)?.catalog.schema_doc())
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn start_session(&self, req: CreateSession) -> Result<SessionInfo, ServiceError> {
        let db = self.database(&req.database)?;
        let matching = MatchConfig {
            delta: req.delta.unwrap_or(self.config.matching.delta),
            tau: req.tau.unwrap_or(self.config.matching.tau),
        };
        matching.validate()?;
        let assignments = match req.mode {
            Mode::Tutor => Vec::new(),
            Mode::Assessment => {
                let d = req.difficulty.ok_or(ServiceError::MissingDifficulty)?;
                if difficulty_label(d).is_none() {
                    return Err(ServiceError::InvalidDifficulty(d));
                }
                let pack = match &req.assignments {
                    Some(custom) => {
                        for a in custom {
                            check_assignment(a, &db.catalog)?;
                        }
                        custom.clone()
                    }
                    None => db.assignments.clone(),
                };
                pack.into_iter().filter(|a| a.difficulty == d).collect()
            }
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session {
            id: id.clone(),
            mode: req.mode,
            database: req.database.clone(),
            difficulty: if req.mode == Mode::Assessment {
                req.difficulty
            } else {
                None
            },
            matching,
            assignments,
            attempts: BTreeMap::new(),
            history: Vec::new(),
        };
        let info = session.info();
        self.record(LogEvent::SessionStarted {
            session: id.clone(),
            mode: session.mode,
            database: session.database.clone(),
            difficulty: session.difficulty,
            delta: matching.delta,
            tau: matching.tau,
            assignments: session.assignments.clone(),
        });
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(info)
    }

    pub fn session_info(&self, id: &str) -> Result<SessionInfo, ServiceError> {
        Ok(lock(&*self.session(id)?).info())
    }

    fn push_history(&self, s: &mut Session, record: Interaction) {
        self.record(LogEvent::Interaction {
            session: s.id.clone(),
            record: record.clone(),
        });
        s.history.push(record);
    }

    pub fn translate_and_run(
        &self,
        id: &str,
        text: &str,
    ) -> Result<TranslateResponse, ServiceError> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.mode == Mode::Assessment {
            return Err(ServiceError::ModeViolation(
                "the natural-language interface is disabled in assessment sessions",
            ));
        }
        let db = self.database(&s.database)?;
        let translator = Translator::new(s.matching);
        let outcome = translator.translate_and_run(&db.catalog, text);
        let record = Interaction {
            kind: InteractionKind::Translate,
            input: text.to_string(),
            sql: outcome.as_ref().ok().map(|(t, _)| t.sql.clone()),
            error: outcome.as_ref().err().map(|e| e.code().to_string()),
        };
        self.push_history(&mut s, record);
        let (t, table) = outcome.map_err(ServiceError::TranslationFailed)?;
        Ok(TranslateResponse {
            sql: t.sql,
            class: t.class,
            result: table,
            diagnostics: serde_json::to_value(&t.diagnostics).unwrap_or_default(),
        })
    }

    pub fn run_sql(&self, id: &str, sql: &str) -> Result<ResultTable, ServiceError> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.mode == Mode::Assessment {
            return Err(ServiceError::ModeViolation(
                "assessment sessions only accept answers to assignments",
            ));
        }
        let db = self.database(&s.database)?;
        let outcome = parse_sql(sql)
            .map_err(ServiceError::from)
            .and_then(|q| execute(&q, &db.catalog).map_err(ServiceError::from));
        let record = Interaction {
            kind: InteractionKind::Sql,
            input: sql.to_string(),
            sql: Some(sql.to_string()),
            error: outcome.as_ref().err().map(|e| e.code().to_string()),
        };
        self.push_history(&mut s, record);
        outcome
    }

    /// Grades one submission by comparing its view with the reference view.
    pub fn submit_answer(
        &self,
        id: &str,
        assignment: &str,
        sql: &str,
    ) -> Result<AnswerResponse, ServiceError> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.mode == Mode::Tutor {
            return Err(ServiceError::ModeViolation(
                "tutoring sessions have no assignments to answer",
            ));
        }
        let a = s
            .assignments
            .iter()
            .find(|a| a.id == assignment)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownAssignment(assignment.to_string()))?;
        if let Some(prev) = s.attempts.get(&a.id) {
            if prev.correct || prev.count >= self.config.attempts {
                return Err(ServiceError::DuplicateSubmission(a.id.clone()));
            }
        }
        let db = self.database(&s.database)?;
        let reference = parse_sql(&a.reference_sql)
            .map_err(ServiceError::from)
            .and_then(|q| execute(&q, &db.catalog).map_err(ServiceError::from))?;
        let student = parse_sql(sql)
            .map_err(ServiceError::from)
            .and_then(|q| execute(&q, &db.catalog).map_err(ServiceError::from));
        let correct = student
            .as_ref()
            .is_ok_and(|t| result_equal_with(t, &reference, self.config.semantics));
        let earned = if correct { a.points } else { 0 };
        let count = s.attempts.get(&a.id).map_or(0, |p| p.count) + 1;
        s.attempts.insert(
            a.id.clone(),
            Attempt {
                correct,
                earned,
                count,
            },
        );
        self.record(LogEvent::Submission {
            session: s.id.clone(),
            assignment: a.id.clone(),
            sql: sql.to_string(),
            correct,
            earned,
        });
        let record = Interaction {
            kind: InteractionKind::Answer,
            input: sql.to_string(),
            sql: Some(sql.to_string()),
            error: student.as_ref().err().map(|e| e.code().to_string()),
        };
        self.push_history(&mut s, record);
        let finished = correct || count >= self.config.attempts;
        let expected_shown = !correct && finished;
        Ok(AnswerResponse {
            assignment: a.id,
            correct,
            earned_points: earned,
            expected_shown,
            expected: expected_shown.then_some(reference),
            error: student.err().map(|e| e.to_api()),
        })
    }

    pub fn score(&self, id: &str) -> Result<Score, ServiceError> {
        Ok(lock(&*self.session(id)?).score())
    }

    pub fn assignments(&self, id: &str) -> Result<Vec<AssignmentView>, ServiceError> {
        Ok(lock(&*self.session(id)?)
            .assignments
            .iter()
            .map(AssignmentView::from)
            .collect())
    }

    pub fn history(&self, id: &str) -> Result<Vec<Interaction>, ServiceError> {
        Ok(lock(&*self.session(id)?).history.clone())
    }
}
