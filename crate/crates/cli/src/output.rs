use std::fmt::Write as _;

use cyrus_api::ResultTable;
use serde_json::Value;

use crate::Format;

pub fn table(t: &ResultTable, format: Format) -> String {
    match format {
        Format::Table => t.to_text(),
        Format::Csv => t.to_csv(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(t).unwrap_or_default()),
    }
}

fn num(v: &Value) -> String {
    v.as_f64()
        .map(|x| format!("{x:.3}"))
        .unwrap_or_else(|| "-".into())
}

fn text<'a>(v: &'a Value, key: &str) -> &'a str {
    v.get(key).and_then(Value::as_str).unwrap_or("")
}

fn list<'a>(v: &'a Value, key: &str) -> &'a [Value] {
    v.get(key)
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .unwrap_or(&[])
}

/// Matcher diagnostics as indented text.
pub fn explain(d: &Value) -> String {
    let mut out = String::new();
    let terms: Vec<&str> = list(d, "t_n").iter().map(|t| text(t, "text")).collect();
    let _ = writeln!(out, "class: {}", text(d, "class"));
    let _ = writeln!(out, "terms (T_n): {}", terms.join(", "));
    let _ = writeln!(out, "candidate tables (L_t):");
    for c in list(d, "candidates") {
        let _ = writeln!(
            out,
            "  {:<14} via {:<12} sigma {}",
            text(c, "table"),
            text(c, "term"),
            num(&c["sigma"])
        );
    }
    let _ = writeln!(out, "scores (Psi):");
    for s in list(d, "scores") {
        let _ = writeln!(
            out,
            "  {:<14} Psi {}  sigma {}  penalty {}",
            text(s, "table"),
            num(&s["psi"]),
            num(&s["sigma"]),
            num(&s["penalty"])
        );
        for b in list(s, "mu") {
            let _ = writeln!(
                out,
                "    {} -> {} ({})",
                text(b, "term"),
                text(b, "column"),
                num(&b["sigma"])
            );
        }
    }
    let selected: Vec<&str> = list(d, "selected")
        .iter()
        .filter_map(Value::as_str)
        .collect();
    let _ = writeln!(out, "selected (F_t): {}", selected.join(", "));
    let lits = list(d, "literals");
    if !lits.is_empty() {
        let _ = writeln!(out, "literals:");
        for l in lits {
            let _ = writeln!(
                out,
                "  {} -> {}.{} via {}",
                text(l, "literal"),
                text(l, "table"),
                text(l, "column"),
                text(l, "by")
            );
        }
    }
    out
}
