//! Append-only JSON-lines log of sessions and submissions.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use cyrus_api::{Assignment, Mode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub input: String,
    pub sql: Option<String>,
    /// Error code when the turn failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Translate,
    Sql,
    Answer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    SessionStarted {
        session: String,
        mode: Mode,
        database: String,
        difficulty: Option<u8>,
        delta: f64,
        tau: f64,
        assignments: Vec<Assignment>,
    },
    Interaction {
        session: String,
        record: Interaction,
    },
    Submission {
        session: String,
        assignment: String,
        sql: String,
        correct: bool,
        earned: u32,
    },
}

/// Writes one event per line. Each append is a single write under a lock,
/// so concurrent sessions never interleave partial records.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl EventLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, event: &LogEvent) -> io::Result<()> {
        let mut line = serde_json::to_vec(event).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(&line)?;
        f.flush()
    }

    pub fn sync(&self) -> io::Result<()> {
        self.file
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .sync_data()
    }
}

pub fn read_events(path: &Path) -> io::Result<Vec<LogEvent>> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), n + 1),
            )
        })?;
        events.push(event);
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Totals {
    pub earned: u32,
    pub possible: u32,
}

/// Scores recomputed from the log alone. A later submission for the same
/// assignment replaces the earlier one.
pub fn replay_scores(events: &[LogEvent]) -> BTreeMap<String, Totals> {
    let mut possible: BTreeMap<String, u32> = BTreeMap::new();
    let mut earned: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for e in events {
        match e {
            LogEvent::SessionStarted {
                session,
                mode,
                assignments,
                ..
            } => {
                let total = match mode {
                    Mode::Assessment => assignments.iter().map(|a| a.points).sum(),
                    Mode::Tutor => 0,
                };
                possible.insert(session.clone(), total);
                earned.entry(session.clone()).or_default();
            }
            LogEvent::Submission {
                session,
                assignment,
                earned: e,
                ..
            } => {
                earned
                    .entry(session.clone())
                    .or_default()
                    .insert(assignment.clone(), *e);
            }
            LogEvent::Interaction { .. } => {}
        }
    }
    possible
        .into_iter()
        .map(|(s, possible)| {
            let earned = earned.get(&s).map(|m| m.values().sum()).unwrap_or(0);
            (s, Totals { earned, possible })
        })
        .collect()
}
