//! Batch grading: one assessment session per student and difficulty.

use std::collections::BTreeMap;
use std::path::Path;

use cyrus_api::{Assignment, CreateSession, ResultTable, Value};
use cyrus_client::{Client, ClientError};
use serde::{Deserialize, Serialize};

use crate::{Failure, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub student: String,
    pub assignment: String,
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeRow {
    pub student: String,
    pub assignment: String,
    /// correct, incorrect, syntax-error, unanswered or duplicate. Only
    /// correct earns points.
    pub verdict: String,
    pub points: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Total {
    pub student: String,
    pub earned: u32,
    pub possible: u32,
}

pub fn read_assignments(path: &Path) -> Result<Vec<Assignment>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let raw: Vec<serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| {
                Failure::config(format!("{}: assignment {}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

/// CSV with a `student,assignment,sql` header, or a JSON array of the same
/// records when the file ends in `.json`.
pub fn read_submissions(path: &Path) -> Result<Vec<Submission>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        if text.trim().is_empty() {
            return Ok(Vec::new());
        }
        let raw: Vec<serde_json::Value> = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        return raw
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::from_value(v).map_err(|e| {
                    Failure::config(format!("{}: record {}: {e}", path.display(), i + 1))
                })
            })
            .collect();
    }
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Failure::config(format!("{}: record {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn check_references(pack: &[Assignment], subs: &[Submission]) -> Result<(), Failure> {
    for (i, s) in subs.iter().enumerate() {
        if !pack.iter().any(|a| a.id == s.assignment) {
            return Err(Failure::config(format!(
                "submission record {} ({}): no assignment '{}'",
                i + 1,
                s.student,
                s.assignment
            )));
        }
    }
    Ok(())
}

pub async fn grade(
    client: &Client,
    database: &str,
    pack: &[Assignment],
    subs: &[Submission],
) -> Result<(Vec<GradeRow>, Vec<Total>), Failure> {
    let mut students: Vec<&str> = Vec::new();
    for s in subs {
        if !students.contains(&s.student.as_str()) {
            students.push(&s.student);
        }
    }
    let mut difficulties: Vec<u8> = pack.iter().map(|a| a.difficulty).collect();
    difficulties.sort_unstable();
    difficulties.dedup();

    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for student in students {
        let mut sessions: BTreeMap<u8, String> = BTreeMap::new();
        for &d in &difficulties {
            let mut req = CreateSession::assessment(database, d);
            req.assignments = Some(pack.to_vec());
            sessions.insert(d, client.start_session(&req).await?.id);
        }
        let mut first: BTreeMap<&str, GradeRow> = BTreeMap::new();
        let mut extra = Vec::new();
        for s in subs.iter().filter(|s| s.student == student) {
            let a = pack
                .iter()
                .find(|a| a.id == s.assignment)
                .expect("checked references");
            let session = &sessions[&a.difficulty];
            let row = match client.submit_answer(session, &a.id, &s.sql).await {
                Ok(r) => {
                    let (verdict, note) = match (&r.error, r.correct) {
                        (_, true) => ("correct", None),
                        (Some(e), false) if e.code == "SyntaxError" => {
                            ("syntax-error", Some(e.message.clone()))
                        }
                        (Some(e), false) => ("incorrect", Some(e.message.clone())),
                        (None, false) => ("incorrect", None),
                    };
                    GradeRow {
                        student: student.to_string(),
                        assignment: a.id.clone(),
                        verdict: verdict.to_string(),
                        points: r.earned_points,
                        note,
                    }
                }
                Err(ClientError::Api(e)) if e.code == "DuplicateSubmission" => GradeRow {
                    student: student.to_string(),
                    assignment: a.id.clone(),
                    verdict: "duplicate".to_string(),
                    points: 0,
                    note: Some(e.message),
                },
                Err(e) => return Err(e.into()),
            };
            if first.contains_key(a.id.as_str()) {
                extra.push(row);
            } else {
                first.insert(&a.id, row);
            }
        }
        let mut earned = 0;
        let mut possible = 0;
        for id in sessions.values() {
            let score = client.score(id).await?;
            earned += score.earned;
            possible += score.possible;
        }
        for a in pack {
            rows.push(first.remove(a.id.as_str()).unwrap_or_else(|| GradeRow {
                student: student.to_string(),
                assignment: a.id.clone(),
                verdict: "unanswered".to_string(),
                points: 0,
                note: None,
            }));
        }
        rows.extend(extra);
        totals.push(Total {
            student: student.to_string(),
            earned,
            possible,
        });
    }
    Ok((rows, totals))
}

pub const REPORT_COLUMNS: [&str; 4] = ["student", "assignment", "verdict", "points"];

/// Verdict rows followed by one `TOTAL` row per student.
pub fn report(graded: &(Vec<GradeRow>, Vec<Total>), format: Format) -> String {
    let (rows, totals) = graded;
    if format == Format::Json {
        let doc = serde_json::json!({ "rows": rows, "totals": totals });
        return format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).unwrap_or_default()
        );
    }
    let mut records: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.student.clone(),
                r.assignment.clone(),
                r.verdict.clone(),
                r.points.to_string(),
            ]
        })
        .collect();
    records.extend(totals.iter().map(|t| {
        [
            t.student.clone(),
            "TOTAL".to_string(),
            format!("{}/{}", t.earned, t.possible),
            t.earned.to_string(),
        ]
    }));
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).expect("in-memory csv");
            for r in &records {
                w.write_record(r).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
        }
        _ => ResultTable::new(
            REPORT_COLUMNS.iter().map(|c| c.to_string()).collect(),
            records
                .into_iter()
                .map(|r| r.into_iter().map(Value::Text).collect())
                .collect(),
        )
        .to_text(),
    }
}
