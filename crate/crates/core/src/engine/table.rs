use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::value::Value;

/// Rows under named columns. Column and row order carry no meaning for
/// comparison; see [`result_equal`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Whether duplicate rows count when comparing views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[default]
    Bag,
    Set,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Value>>) -> Self {
        Self { columns, rows }
    }

    pub fn empty(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
    }

    /// Column positions sorted by lowercase name.
    fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.columns.len()).collect();
        idx.sort_by_key(|&i| (self.columns[i].to_lowercase(), i));
        idx
    }

    /// Same table with columns sorted by name and rows sorted.
    pub fn canonical(&self) -> ResultTable {
        let order = self.canonical_order();
        let columns = order.iter().map(|&i| self.columns[i].clone()).collect();
        let mut rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| order.iter().map(|&i| r[i].clone()).collect())
            .collect();
        rows.sort();
        ResultTable { columns, rows }
    }

    /// CSV with columns in canonical name order. Row order is kept.
    pub fn to_csv(&self) -> String {
        let order = self.canonical_order();
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = order.iter().map(|&i| self.columns[i].as_str()).collect();
        // Writes into a Vec cannot fail.
        w.write_record(&header).expect("in-memory csv");
        for row in &self.rows {
            let fields: Vec<String> = order.iter().map(|&i| row[i].to_string()).collect();
            w.write_record(&fields).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("result tables serialize")
    }

    /// Plain-text grid for terminals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, fields: &[String]| {
            let parts: Vec<String> = fields
                .iter()
                .zip(&widths)
                .map(|(f, &w)| format!("{f:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", parts.join(" | ").trim_end());
        };
        line(&mut out, &self.columns);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("-+-"));
        for row in &cells {
            line(&mut out, row);
        }
        let _ = writeln!(
            out,
            "({} row{})",
            cells.len(),
            if cells.len() == 1 { "" } else { "s" }
        );
        out
    }
}

/// Rows agreeing on every shared column name; shared columns appear once,
/// in the left table's position. No shared columns gives the product.
/// NULL never joins.
pub fn natural_join(left: &ResultTable, right: &ResultTable) -> ResultTable {
    let shared: Vec<(usize, usize)> = left
        .columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| right.column_index(c).map(|j| (i, j)))
        .collect();
    let extra: Vec<usize> = (0..right.columns.len())
        .filter(|j| !shared.iter().any(|&(_, s)| s == *j))
        .collect();
    let mut columns = left.columns.clone();
    columns.extend(extra.iter().map(|&j| right.columns[j].clone()));
    let mut rows = Vec::new();
    for l in &left.rows {
        for r in &right.rows {
            let agree = shared
                .iter()
                .all(|&(i, j)| !l[i].is_null() && !r[j].is_null() && l[i] == r[j]);
            if agree {
                let mut row = l.clone();
                row.extend(extra.iter().map(|&j| r[j].clone()));
                rows.push(row);
            }
        }
    }
    ResultTable { columns, rows }
}

/// Identical views under bag semantics.
pub fn result_equal(a: &ResultTable, b: &ResultTable) -> bool {
    result_equal_with(a, b, Semantics::Bag)
}

/// Same column names (any order, case-insensitive) and the same rows after
/// aligning columns by name. Row order never matters; duplicates matter
/// only under [`Semantics::Bag`].
pub fn result_equal_with(a: &ResultTable, b: &ResultTable, semantics: Semantics) -> bool {
    if a.columns.len() != b.columns.len() {
        return false;
    }
    let (ca, cb) = (a.canonical(), b.canonical());
    let same_names = ca
        .columns
        .iter()
        .zip(&cb.columns)
        .all(|(x, y)| x.eq_ignore_ascii_case(y));
    if !same_names {
        return false;
    }
    let (mut ra, mut rb) = (ca.rows, cb.rows);
    if semantics == Semantics::Set {
        ra.dedup();
        rb.dedup();
    }
    ra == rb
}
