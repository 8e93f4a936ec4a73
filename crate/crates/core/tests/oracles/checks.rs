//! Acceptance checks. Each returns a one-line summary on success and a
//! description of the first disagreement on failure.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cyrus_core::catalog::{ColumnDef, DatabaseCatalog, RelationInstance, TableSchema, Vocabulary};
use cyrus_core::engine::{execute, result_equal, ResultTable};
use cyrus_core::fixture::music;
use cyrus_core::matcher::stable::{blocking_pair, deferred_acceptance};
use cyrus_core::matcher::{
    edit_distance, edit_distance_adjusted, homo_sim, lambda_sim, penalty, psi_sim, sigma,
};
use cyrus_core::sql::{parse_sql, render_sql, AggFunc, CompareOp, Query};
use cyrus_core::translate::Translator;
use cyrus_core::value::{DataType, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{AGGREGATE, CORPUS, DIVISION, JOIN};
use super::*;

pub type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn text_rows(t: &ResultTable) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect())
        .collect();
    rows.sort();
    rows
}

fn run(sql: &str, db: &DatabaseCatalog) -> Result<ResultTable, String> {
    let q = parse_sql(sql).map_err(|e| format!("{sql}: {e}"))?;
    execute(&q, db).map_err(|e| format!("{sql}: {e}"))
}

/// Every example sentence yields its reference SQL and class; the whole
/// corpus within a second.
pub fn corpus() -> Outcome {
    let translator = Translator::default();
    let start = Instant::now();
    for (english, class, reference) in CORPUS {
        let expected = parse_sql(reference).map_err(|e| e.to_string())?;
        let t = translator
            .translate(music(), english)
            .map_err(|e| format!("'{english}': {e}"))?;
        if t.ast != expected || t.class != *class {
            return Err(format!("'{english}' gave {:?} {}", t.class, t.sql));
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(1) {
        return Err(format!("corpus took {took:?}"));
    }
    Ok(format!("{} queries in {took:?}", CORPUS.len()))
}

/// Reference results on the fixture, and agreement with a nested-loop
/// interpreter on random small instances.
pub fn execution_fidelity() -> Outcome {
    let db = music();
    let s = |v: &[&[&str]]| -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = v
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        rows.sort();
        rows
    };
    let join = run(JOIN, db)?;
    if text_rows(&join) != s(&[&["Reflection", "Brian Eno"], &["Take Me Apart", "Kelela"]]) {
        return Err(format!("join gave {:?}", text_rows(&join)));
    }
    for album in ["Death Peak", "Shake the Shudder", "London 03.06.17"] {
        if join.rows.iter().any(|r| r[0] == Value::from(album)) {
            return Err(format!("join kept {album}"));
        }
    }
    let division = run(DIVISION, db)?;
    let g = "Gone is Gone";
    let m = "Mastodon";
    if text_rows(&division) != s(&[&[g], &[g], &[g], &[m], &[m], &[m]]) {
        return Err(format!("division gave {:?}", text_rows(&division)));
    }
    let agg = run(AGGREGATE, db)?;
    if text_rows(&agg) != s(&[&["Brian Eno", "2100000"], &["Mastodon", "2600000"]]) {
        return Err(format!("aggregate gave {:?}", text_rows(&agg)));
    }
    for (_, _, sql) in CORPUS {
        let q = parse_sql(sql).map_err(|e| e.to_string())?;
        let got = execute(&q, db).map_err(|e| e.to_string())?;
        if !result_equal(&got, &naive_execute(&q, db)) {
            return Err(format!("{sql} disagrees with the interpreter"));
        }
    }
    let mut r = rng(7);
    let cases = 2000;
    for i in 0..cases {
        let db = random_instance(&mut r, 8);
        let q = random_query(&mut r);
        let got = execute(&q, &db).map_err(|e| format!("case {i}: {}: {e}", render_sql(&q)))?;
        let want = naive_execute(&q, &db);
        if !result_equal(&got, &want) {
            return Err(format!(
                "case {i}: {}\n got {:?}\n want {:?}",
                render_sql(&q),
                got.canonical(),
                want.canonical()
            ));
        }
    }
    Ok(format!("fixture results plus {cases} random instances"))
}

pub fn levenshtein() -> Outcome {
    if edit_distance("eaten", "sitting") != 5 {
        return Err(format!(
            "lev(eaten, sitting) = {}",
            edit_distance("eaten", "sitting")
        ));
    }
    // Exhaustive on short strings against breadth-first search.
    let mut short = vec![String::new()];
    for len in 1..=4 {
        let prev: Vec<String> = short
            .iter()
            .filter(|s| s.len() == len - 1)
            .cloned()
            .collect();
        for p in prev {
            for c in ['a', 'b'] {
                short.push(format!("{p}{c}"));
            }
        }
    }
    for a in &short {
        for b in &short {
            let (got, want) = (edit_distance(a, b), lev_bfs(a, b));
            if got != want {
                return Err(format!("lev({a:?}, {b:?}) = {got}, search says {want}"));
            }
        }
    }
    let alphabet: Vec<char> = "abcdeAB".chars().collect();
    let mut r = rng(11);
    let pairs = 10_000;
    for _ in 0..pairs {
        let a = random_string(&mut r, &alphabet, 12);
        let b = random_string(&mut r, &alphabet, 12);
        let c = random_string(&mut r, &alphabet, 12);
        let d = edit_distance(&a, &b);
        if d != lev_memo(&a, &b) {
            return Err(format!(
                "lev({a:?}, {b:?}) = {d}, recursion says {}",
                lev_memo(&a, &b)
            ));
        }
        if d != edit_distance(&b, &a) {
            return Err(format!("asymmetric on {a:?}, {b:?}"));
        }
        if (d == 0) != a.eq_ignore_ascii_case(&b) {
            return Err(format!("identity fails on {a:?}, {b:?}"));
        }
        if d > a.chars().count().max(b.chars().count()) {
            return Err(format!("exceeds max length on {a:?}, {b:?}"));
        }
        if edit_distance(&a, &c) > d + edit_distance(&b, &c) {
            return Err(format!("triangle fails on {a:?}, {b:?}, {c:?}"));
        }
        let adj = edit_distance_adjusted(&a, &b);
        let sub = is_substring(&a, &b) || is_substring(&b, &a);
        if (adj == 0) != sub || (!sub && adj != d) {
            return Err(format!("adjusted distance {adj} on {a:?}, {b:?}"));
        }
    }
    Ok(format!(
        "{} exhaustive pairs, {pairs} random pairs",
        short.len() * short.len()
    ))
}

pub fn similarity_bounds() -> Outcome {
    let vocab = music().vocabulary();
    let s = sigma("track", "tracks", vocab).map_err(|e| e.to_string())?;
    if s.sigma != 1.0 {
        return Err(format!("sigma(track, tracks) = {}", s.sigma));
    }
    if lambda_sim("", "").is_ok() || psi_sim("", "x").is_ok() {
        return Err("empty input accepted".into());
    }
    let alphabet: Vec<char> = "abcdeiou_rstTR 1".chars().collect();
    let mut r = rng(13);
    let n = 10_000;
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    for _ in 0..n {
        let a = random_string(&mut r, &alphabet, 10);
        let b = random_string(&mut r, &alphabet, 10);
        let h = homo_sim(&a, &b, vocab);
        if !unit(h) {
            return Err(format!("homo({a:?}, {b:?}) = {h}"));
        }
        if let Ok(l) = lambda_sim(&a, &b) {
            if !unit(l) {
                return Err(format!("lambda({a:?}, {b:?}) = {l}"));
            }
        }
        match sigma(&a, &b, vocab) {
            Ok(s) if !(unit(s.psi) && unit(s.sigma) && unit(s.lambda)) => {
                return Err(format!("sigma({a:?}, {b:?}) = {s:?}"));
            }
            Err(_) if !a.is_empty() => return Err(format!("sigma({a:?}, {b:?}) failed")),
            _ => {}
        }
    }
    Ok(format!(
        "sigma(track, tracks) = 1, {n} random pairs in [0, 1]"
    ))
}

fn random_scores(r: &mut impl Rng, terms: usize, cols: usize) -> Vec<Vec<f64>> {
    let levels = [0.0, 0.25, 0.5, 0.6, 0.75, 1.0];
    (0..terms)
        .map(|_| {
            (0..cols)
                .map(|_| levels[r.random_range(0..levels.len())])
                .collect()
        })
        .collect()
}

pub fn matching() -> Outcome {
    let mut r = rng(17);
    let floor = 0.5;
    let mut instances = 0;
    for terms in 1..=5 {
        for cols in 1..=5 {
            for _ in 0..40 {
                let scores = random_scores(&mut r, terms, cols);
                let m = deferred_acceptance(&scores, floor);
                if let Some(p) = blocking_pair(&scores, floor, &m) {
                    return Err(format!("blocking pair {p:?} in {m:?} for {scores:?}"));
                }
                if !is_stable(&scores, floor, &m) {
                    return Err(format!("{m:?} unstable for {scores:?}"));
                }
                let best = term_optimal(&scores, floor);
                if m != best {
                    return Err(format!(
                        "{m:?} is not term-optimal ({best:?}) for {scores:?}"
                    ));
                }
                instances += 1;
            }
        }
    }
    let (_, m) = Translator::default()
        .analyze_and_match(music(), "List the number and title of the songs.")
        .map_err(|e| e.to_string())?;
    let bound = |term: &str| {
        m.bindings()
            .find(|b| b.term == term)
            .map(|b| b.column.clone())
    };
    if bound("number").as_deref() != Some("TrackId") || bound("title").as_deref() != Some("Track") {
        return Err(format!(
            "number -> {:?}, title -> {:?}",
            bound("number"),
            bound("title")
        ));
    }
    Ok(format!(
        "{instances} random instances match brute force; number -> TrackId, title -> Track"
    ))
}

pub fn penalty_cases() -> Outcome {
    for t_p in 0..20 {
        if penalty(0, t_p) != 0.0 {
            return Err(format!("pi(0, {t_p}) != 0"));
        }
        for a in 1..=t_p.max(1) {
            let p = penalty(a, t_p);
            if !(p > 0.0 && p <= t_p.max(1) as f64) {
                return Err(format!("pi({a}, {t_p}) = {p}"));
            }
        }
    }
    if penalty(1, 1) != 1.0 || penalty(1, 0) != 1.0 || penalty(2, 5) != 0.5 {
        return Err("guarded denominator".into());
    }
    Ok("zero exactly when nothing is unmatched; denominators guarded".into())
}

fn pair_catalog(rows: &[(String, String)]) -> DatabaseCatalog {
    let schema = TableSchema {
        name: "tracks".into(),
        columns: vec![
            ColumnDef {
                name: "Artist".into(),
                dtype: DataType::Text,
            },
            ColumnDef {
                name: "Label".into(),
                dtype: DataType::Text,
            },
        ],
        primary_key: vec![],
    };
    let rows = rows
        .iter()
        .map(|(a, l)| vec![Value::from(a.as_str()), Value::from(l.as_str())])
        .collect();
    DatabaseCatalog::new(
        "pairs",
        vec![RelationInstance::new(schema, rows).unwrap()],
        Vocabulary::default(),
    )
    .unwrap()
}

fn division_sql(entity: &str) -> String {
    format!(
        "SELECT Artist FROM tracks AS t WHERE (SELECT Label FROM tracks WHERE Artist = t.Artist) \
         CONTAINS (SELECT Label FROM tracks WHERE Artist = '{entity}')"
    )
}

fn division_instance(rows: &[(String, String)], entities: &[&str]) -> Result<(), String> {
    let db = pair_catalog(rows);
    for e in entities {
        let got = run(&division_sql(e), &db)?;
        let mut got: Vec<String> = got.rows.iter().map(|r| r[0].to_string()).collect();
        let mut want = label_superset(rows, e);
        got.sort();
        want.sort();
        if got != want {
            return Err(format!(
                "entity {e} over {rows:?}: got {got:?}, want {want:?}"
            ));
        }
    }
    Ok(())
}

/// Multisets of up to `max` elements drawn from `domain`.
fn multisets<T: Clone>(domain: &[T], max: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(
        domain: &[T],
        from: usize,
        left: usize,
        cur: &mut Vec<T>,
        out: &mut Vec<Vec<T>>,
    ) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in from..domain.len() {
            cur.push(domain[i].clone());
            go(domain, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(domain, 0, max, &mut Vec::new(), &mut out);
    out
}

pub fn division() -> Outcome {
    let pairs = |artists: &[&str], labels: &[&str]| -> Vec<(String, String)> {
        artists
            .iter()
            .flat_map(|a| labels.iter().map(move |l| (a.to_string(), l.to_string())))
            .collect()
    };
    let small = pairs(
        &["Gone is Gone", "Mastodon"],
        &["Rise Above", "Black Dune", "Reprise"],
    );
    let bags = multisets(&small, 8);
    for rows in &bags {
        division_instance(rows, &["Gone is Gone", "Mastodon", "Nobody"])?;
    }
    let wide = pairs(
        &["Gone is Gone", "Mastodon", "Kvelertak"],
        &["Rise Above", "Black Dune", "Reprise"],
    );
    let mut sets = 0;
    for mask in 0u32..(1 << wide.len()) {
        if mask.count_ones() > 8 {
            continue;
        }
        let rows: Vec<(String, String)> = (0..wide.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| wide[i].clone())
            .collect();
        division_instance(&rows, &["Gone is Gone", "Kvelertak", "Nobody"])?;
        sets += 1;
    }
    Ok(format!(
        "{} bags over 2x3 and {sets} sets over 3x3 agree with label containment",
        bags.len()
    ))
}

/// (Artist, Sales) for every tracks row joined to a charts row of `year`.
fn artist_sales(db: &DatabaseCatalog, year: i64) -> Vec<(Value, Value)> {
    let tracks = db.relation("tracks").unwrap();
    let charts = db.relation("charts").unwrap();
    let ti = |n: &str| tracks.schema.column_index(n).unwrap();
    let ci = |n: &str| charts.schema.column_index(n).unwrap();
    let mut out = Vec::new();
    for t in &tracks.rows {
        for c in &charts.rows {
            if t[ti("Album")] == c[ci("Album")] && c[ci("Year")] == Value::Int(year) {
                out.push((t[ti("Artist")].clone(), c[ci("Sales")].clone()));
            }
        }
    }
    out
}

fn keyed(t: &ResultTable) -> BTreeMap<String, String> {
    t.rows
        .iter()
        .map(|r| (r[0].to_string(), r[1].to_string()))
        .collect()
}

pub fn aggregates() -> Outcome {
    let db = music();
    let funcs = [
        AggFunc::Sum,
        AggFunc::Avg,
        AggFunc::Min,
        AggFunc::Max,
        AggFunc::Count,
    ];
    let ops = [
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ];
    let mut cases = 0;
    for year in [2017, 1967, 2004, 1999] {
        let pairs = artist_sales(db, year);
        let mut total = 0i64;
        for f in funcs {
            let sql = format!(
                "SELECT Artist, {k}(Sales) FROM tracks NATURAL JOIN charts WHERE Year = {year} GROUP BY Artist",
                k = f.keyword()
            );
            let got = run(&sql, db)?;
            let want = partition_filter(&pairs, f, None);
            let want: BTreeMap<String, String> = want
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect();
            if keyed(&got) != want {
                return Err(format!("{sql}: got {:?}, want {want:?}", keyed(&got)));
            }
            if f == AggFunc::Sum {
                total = got.rows.iter().filter_map(|r| r[1].as_f64()).sum::<f64>() as i64;
            }
            for op in ops {
                for threshold in [0, 1, 2, 300_000, 1_000_000, 2_000_000, 2_100_000] {
                    let sql = format!(
                        "{sql} HAVING {k}(Sales) {o} {threshold}",
                        k = f.keyword(),
                        o = op.symbol()
                    );
                    let got = run(&sql, db)?;
                    let want = partition_filter(&pairs, f, Some((op, Value::Int(threshold))));
                    let want: BTreeMap<String, String> = want
                        .iter()
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .collect();
                    if keyed(&got) != want {
                        return Err(format!("{sql}: got {:?}, want {want:?}", keyed(&got)));
                    }
                    cases += 1;
                }
            }
        }
        let all: i64 = pairs.iter().filter_map(|(_, v)| v.as_f64()).sum::<f64>() as i64;
        if total != all {
            return Err(format!("group sums {total} != total {all} for {year}"));
        }
    }
    Ok(format!(
        "{cases} grouped queries agree with partition-and-filter; sums conserved"
    ))
}

pub fn round_trip() -> Outcome {
    let mut r = rng(19);
    let n = 1500;
    for i in 0..n {
        let q: Query = arb_query(&mut r, 2);
        let sql = render_sql(&q);
        let back = parse_sql(&sql).map_err(|e| format!("case {i}: {e}\n{sql}"))?;
        if back != q {
            return Err(format!("case {i} changed on re-parse:\n{sql}"));
        }
    }
    Ok(format!("{n} random syntax trees survive render and parse"))
}
