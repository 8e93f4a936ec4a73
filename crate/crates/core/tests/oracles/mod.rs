//! Reference implementations used only by tests. Each is deliberately
//! naive and shares no code with the implementation it checks.
#![allow(dead_code)]

pub mod checks;
pub mod corpus;

use std::collections::{BTreeSet, HashMap, VecDeque};

use cyrus_core::catalog::{ColumnDef, DatabaseCatalog, RelationInstance, TableSchema, Vocabulary};
use cyrus_core::engine::ResultTable;
use cyrus_core::sql::*;
use cyrus_core::value::{DataType, Value};
use rand::seq::IndexedRandom;
use rand::Rng;

// ---------------------------------------------------------------- edit distance

/// Breadth-first search over single-character edits. Exponential; only for
/// short strings over small alphabets.
pub fn lev_bfs(a: &str, b: &str) -> usize {
    let a: String = a.to_lowercase();
    let b: String = b.to_lowercase();
    if a == b {
        return 0;
    }
    let mut alphabet: Vec<char> = a.chars().chain(b.chars()).collect();
    alphabet.sort_unstable();
    alphabet.dedup();
    let max_len = a.chars().count().max(b.chars().count()) + 1;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(a.clone());
    queue.push_back((a, 0usize));
    while let Some((s, d)) = queue.pop_front() {
        let chars: Vec<char> = s.chars().collect();
        let mut next = Vec::new();
        for i in 0..chars.len() {
            let mut del = chars.clone();
            del.remove(i);
            next.push(del);
            for &c in &alphabet {
                if c != chars[i] {
                    let mut sub = chars.clone();
                    sub[i] = c;
                    next.push(sub);
                }
            }
        }
        if chars.len() < max_len {
            for i in 0..=chars.len() {
                for &c in &alphabet {
                    let mut ins = chars.clone();
                    ins.insert(i, c);
                    next.push(ins);
                }
            }
        }
        for n in next {
            let n: String = n.into_iter().collect();
            if n == b {
                return d + 1;
            }
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    unreachable!("every string is reachable")
}

/// Textbook recursion on prefixes with memoization.
pub fn lev_memo(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let key = (a.len(), b.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let (ra, rb) = (&a[..a.len() - 1], &b[..b.len() - 1]);
        let sub = go(ra, rb, memo) + usize::from(a[a.len() - 1] != b[b.len() - 1]);
        let v = sub.min(go(ra, b, memo) + 1).min(go(a, rb, memo) + 1);
        memo.insert(key, v);
        v
    }
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    go(&a, &b, &mut HashMap::new())
}

pub fn is_substring(a: &str, b: &str) -> bool {
    b.to_lowercase().contains(&a.to_lowercase())
}

pub fn random_string(rng: &mut impl Rng, alphabet: &[char], max_len: usize) -> String {
    let n = rng.random_range(0..=max_len);
    (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

// ---------------------------------------------------------------- stable matching

/// Strict preference with index tie-breaks, as the matcher defines it.
fn prefers(score_a: f64, idx_a: usize, score_b: f64, idx_b: usize) -> bool {
    score_a > score_b || (score_a == score_b && idx_a < idx_b)
}

/// Every partial one-to-one assignment using only pairs at or above `floor`.
pub fn all_matchings(scores: &[Vec<f64>], floor: f64) -> Vec<Vec<Option<usize>>> {
    fn go(
        t: usize,
        scores: &[Vec<f64>],
        floor: f64,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if t == scores.len() {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(t + 1, scores, floor, used, cur, out);
        cur.pop();
        for c in 0..scores[t].len() {
            if !used[c] && scores[t][c] >= floor {
                used[c] = true;
                cur.push(Some(c));
                go(t + 1, scores, floor, used, cur, out);
                cur.pop();
                used[c] = false;
            }
        }
    }
    let cols = scores.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::new();
    go(
        0,
        scores,
        floor,
        &mut vec![false; cols],
        &mut Vec::new(),
        &mut out,
    );
    out
}

pub fn is_stable(scores: &[Vec<f64>], floor: f64, m: &[Option<usize>]) -> bool {
    let cols = scores.iter().map(Vec::len).max().unwrap_or(0);
    let mut holder: Vec<Option<usize>> = vec![None; cols];
    for (t, c) in m.iter().enumerate() {
        if let Some(c) = c {
            holder[*c] = Some(t);
        }
    }
    for t in 0..scores.len() {
        for c in 0..scores[t].len() {
            if scores[t][c] < floor || m[t] == Some(c) {
                continue;
            }
            let t_wants = match m[t] {
                None => true,
                Some(cur) => prefers(scores[t][c], c, scores[t][cur], cur),
            };
            let c_wants = match holder[c] {
                None => true,
                Some(cur) => prefers(scores[t][c], t, scores[cur][c], cur),
            };
            if t_wants && c_wants {
                return false;
            }
        }
    }
    true
}

/// The stable matching every term likes best, found by exhaustive search.
pub fn term_optimal(scores: &[Vec<f64>], floor: f64) -> Vec<Option<usize>> {
    let stable: Vec<Vec<Option<usize>>> = all_matchings(scores, floor)
        .into_iter()
        .filter(|m| is_stable(scores, floor, m))
        .collect();
    (0..scores.len())
        .map(|t| {
            stable
                .iter()
                .map(|m| m[t])
                .fold(None, |best: Option<usize>, c| match (best, c) {
                    (None, c) => c,
                    (b, None) => b,
                    (Some(b), Some(c)) => {
                        if prefers(scores[t][c], c, scores[t][b], b) {
                            Some(c)
                        } else {
                            Some(b)
                        }
                    }
                })
        })
        .collect()
}

// ---------------------------------------------------------------- naive evaluator

#[derive(Clone, Debug)]
struct NCol {
    name: String,
    sources: Vec<String>,
}

#[derive(Clone, Debug)]
struct NRel {
    cols: Vec<NCol>,
    rows: Vec<Vec<Value>>,
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Text(x), Value::Text(y)) => x == y,
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
    }
}

fn row_same(a: &[Value], b: &[Value]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same(x, y))
}

fn sql_cmp(a: &Value, op: CompareOp, b: &Value) -> bool {
    let ord = match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => match x.partial_cmp(&y) {
                Some(o) => o,
                None => return false,
            },
            _ => return false,
        },
    };
    use std::cmp::Ordering::*;
    match op {
        CompareOp::Eq => ord == Equal,
        CompareOp::Ne => ord != Equal,
        CompareOp::Lt => ord == Less,
        CompareOp::Le => ord != Greater,
        CompareOp::Gt => ord == Greater,
        CompareOp::Ge => ord != Less,
    }
}

fn table(db: &DatabaseCatalog, t: &TableRef) -> NRel {
    let rel = db
        .relations()
        .iter()
        .find(|r| r.name().eq_ignore_ascii_case(&t.name))
        .expect("oracle queries name existing tables");
    let source = t
        .alias
        .clone()
        .unwrap_or_else(|| t.name.clone())
        .to_lowercase();
    NRel {
        cols: rel
            .schema
            .columns
            .iter()
            .map(|c| NCol {
                name: c.name.clone(),
                sources: vec![source.clone()],
            })
            .collect(),
        rows: rel.rows.clone(),
    }
}

fn nested_loop_join(a: &NRel, b: &NRel) -> NRel {
    let mut cols = a.cols.clone();
    let mut pairs = Vec::new();
    let mut extra = Vec::new();
    for (j, c) in b.cols.iter().enumerate() {
        match a
            .cols
            .iter()
            .position(|x| x.name.eq_ignore_ascii_case(&c.name))
        {
            Some(i) => {
                pairs.push((i, j));
                cols[i].sources.extend(c.sources.clone());
            }
            None => {
                extra.push(j);
                cols.push(c.clone());
            }
        }
    }
    let mut rows = Vec::new();
    for l in &a.rows {
        for r in &b.rows {
            let ok = pairs
                .iter()
                .all(|&(i, j)| !l[i].is_null() && !r[j].is_null() && same(&l[i], &r[j]));
            if ok {
                let mut row = l.clone();
                for &j in &extra {
                    row.push(r[j].clone());
                }
                rows.push(row);
            }
        }
    }
    NRel { cols, rows }
}

type Env<'a> = Vec<(&'a [NCol], &'a [Value])>;

fn lookup(c: &ColumnRef, env: &Env) -> Value {
    for (cols, row) in env.iter().rev() {
        for (i, col) in cols.iter().enumerate() {
            let qual_ok = c
                .qualifier
                .as_ref()
                .is_none_or(|q| col.sources.contains(&q.to_lowercase()));
            if qual_ok && col.name.eq_ignore_ascii_case(&c.name) {
                return row[i].clone();
            }
        }
    }
    panic!("oracle lookup failed for {c}");
}

fn operand(o: &Operand, env: &Env) -> Value {
    match o {
        Operand::Literal(v) => v.clone(),
        Operand::Column(c) => lookup(c, env),
    }
}

fn holds(p: &Predicate, db: &DatabaseCatalog, env: &Env) -> bool {
    match p {
        Predicate::Compare { left, op, right } => {
            sql_cmp(&operand(left, env), *op, &operand(right, env))
        }
        Predicate::Contains {
            container,
            contained,
        } => {
            let big = eval(container, db, env).1;
            let small = eval(contained, db, env).1;
            small.iter().all(|r| big.iter().any(|b| row_same(r, b)))
        }
        Predicate::Exists { subquery, negated } => eval(subquery, db, env).1.is_empty() == *negated,
        Predicate::InSubquery {
            column,
            subquery,
            negated,
        } => {
            let v = lookup(column, env);
            if v.is_null() {
                return false;
            }
            let found = eval(subquery, db, env).1.iter().any(|r| same(&r[0], &v));
            found != *negated
        }
    }
}

fn agg(a: &Aggregate, cols: &[NCol], rows: &[&Vec<Value>]) -> Value {
    let Some(arg) = &a.arg else {
        return Value::Int(rows.len() as i64);
    };
    let i = cols
        .iter()
        .position(|c| c.name.eq_ignore_ascii_case(&arg.name))
        .expect("aggregate column");
    let vals: Vec<&Value> = rows
        .iter()
        .map(|r| &r[i])
        .filter(|v| !v.is_null())
        .collect();
    match a.func {
        AggFunc::Count => Value::Int(vals.len() as i64),
        _ if vals.is_empty() => Value::Null,
        AggFunc::Sum => {
            if vals.iter().all(|v| matches!(v, Value::Int(_))) {
                Value::Int(
                    vals.iter()
                        .map(|v| if let Value::Int(i) = v { *i } else { 0 })
                        .sum(),
                )
            } else {
                Value::Real(vals.iter().filter_map(|v| v.as_f64()).sum())
            }
        }
        AggFunc::Avg => {
            Value::Real(vals.iter().filter_map(|v| v.as_f64()).sum::<f64>() / vals.len() as f64)
        }
        AggFunc::Min => {
            let mut best = vals[0];
            for v in &vals {
                if sql_cmp(v, CompareOp::Lt, best) {
                    best = v;
                }
            }
            best.clone()
        }
        AggFunc::Max => {
            let mut best = vals[0];
            for v in &vals {
                if sql_cmp(v, CompareOp::Gt, best) {
                    best = v;
                }
            }
            best.clone()
        }
    }
}

fn eval(q: &Query, db: &DatabaseCatalog, outer: &Env) -> (Vec<String>, Vec<Vec<Value>>) {
    match q {
        Query::Except(a, b) => {
            let (cols, left) = eval(a, db, outer);
            let (_, right) = eval(b, db, outer);
            let mut out: Vec<Vec<Value>> = Vec::new();
            for r in left {
                if !right.iter().any(|x| row_same(x, &r)) && !out.iter().any(|x| row_same(x, &r)) {
                    out.push(r);
                }
            }
            (cols, out)
        }
        Query::Select(s) => {
            let mut rel = table(db, &s.from[0]);
            for t in &s.from[1..] {
                rel = nested_loop_join(&rel, &table(db, t));
            }
            let mut kept: Vec<&Vec<Value>> = Vec::new();
            for row in &rel.rows {
                let mut env: Env = outer.clone();
                env.push((&rel.cols, row));
                if s.selection.iter().all(|p| holds(p, db, &env)) {
                    kept.push(row);
                }
            }
            let grouped = s.group_by.is_some()
                || s.having.is_some()
                || matches!(&s.projection, Projection::Items(i) if i.iter().any(|x| matches!(x, SelectItem::Aggregate(_))));
            let idx = |c: &ColumnRef| {
                rel.cols
                    .iter()
                    .position(|x| x.name.eq_ignore_ascii_case(&c.name))
                    .expect("projected column")
            };
            if !grouped {
                return match &s.projection {
                    Projection::Wildcard => (
                        rel.cols.iter().map(|c| c.name.clone()).collect(),
                        kept.into_iter().cloned().collect(),
                    ),
                    Projection::Items(items) => {
                        let cols: Vec<&ColumnRef> = items
                            .iter()
                            .map(|i| match i {
                                SelectItem::Column(c) => c,
                                SelectItem::Aggregate(_) => unreachable!(),
                            })
                            .collect();
                        (
                            cols.iter().map(|c| rel.cols[idx(c)].name.clone()).collect(),
                            kept.iter()
                                .map(|r| cols.iter().map(|c| r[idx(c)].clone()).collect())
                                .collect(),
                        )
                    }
                };
            }
            // Partition by linear scan over groups seen so far.
            let mut groups: Vec<(Value, Vec<&Vec<Value>>)> = Vec::new();
            match &s.group_by {
                Some(g) => {
                    let k = idx(g);
                    for r in &kept {
                        match groups.iter_mut().find(|(v, _)| same(v, &r[k])) {
                            Some((_, members)) => members.push(r),
                            None => groups.push((r[k].clone(), vec![r])),
                        }
                    }
                }
                None => groups.push((Value::Null, kept.clone())),
            }
            let items: Vec<SelectItem> = match &s.projection {
                Projection::Items(i) => i.clone(),
                Projection::Wildcard => vec![SelectItem::Column(s.group_by.clone().unwrap())],
            };
            let names = items
                .iter()
                .map(|i| match i {
                    SelectItem::Column(c) => rel.cols[idx(c)].name.clone(),
                    SelectItem::Aggregate(a) => a.to_string(),
                })
                .collect();
            let mut out = Vec::new();
            for (key, members) in &groups {
                if let Some(h) = &s.having {
                    if !sql_cmp(&agg(&h.aggregate, &rel.cols, members), h.op, &h.value) {
                        continue;
                    }
                }
                out.push(
                    items
                        .iter()
                        .map(|i| match i {
                            SelectItem::Column(_) => key.clone(),
                            SelectItem::Aggregate(a) => agg(a, &rel.cols, members),
                        })
                        .collect(),
                );
            }
            (names, out)
        }
    }
}

/// Direct interpretation, CONTAINS included, with no binding pass.
pub fn naive_execute(q: &Query, db: &DatabaseCatalog) -> ResultTable {
    let (columns, rows) = eval(q, db, &Vec::new());
    ResultTable::new(columns, rows)
}

// ---------------------------------------------------------------- division and grouping

/// For every (artist, label) row whose artist covers all of `entity`'s
/// labels, that artist once. Works on plain pairs.
pub fn label_superset(rows: &[(String, String)], entity: &str) -> Vec<String> {
    let labels_of = |artist: &str| -> BTreeSet<&str> {
        rows.iter()
            .filter(|(a, _)| a == artist)
            .map(|(_, l)| l.as_str())
            .collect()
    };
    let want = labels_of(entity);
    rows.iter()
        .filter(|(a, _)| want.is_subset(&labels_of(a)))
        .map(|(a, _)| a.clone())
        .collect()
}

/// GROUP BY key, aggregate and HAVING filter by brute force over plain
/// (key, measure) pairs.
pub fn partition_filter(
    rows: &[(Value, Value)],
    func: AggFunc,
    having: Option<(CompareOp, Value)>,
) -> Vec<(Value, Value)> {
    let mut keys: Vec<Value> = Vec::new();
    for (k, _) in rows {
        if !keys.iter().any(|x| same(x, k)) {
            keys.push(k.clone());
        }
    }
    let cols = vec![NCol {
        name: "m".into(),
        sources: vec![],
    }];
    let a = Aggregate {
        func,
        arg: Some(ColumnRef::new("m")),
    };
    let mut out = Vec::new();
    for k in keys {
        let members: Vec<Vec<Value>> = rows
            .iter()
            .filter(|(x, _)| same(x, &k))
            .map(|(_, m)| vec![m.clone()])
            .collect();
        let refs: Vec<&Vec<Value>> = members.iter().collect();
        let v = agg(&a, &cols, &refs);
        if having.as_ref().is_none_or(|(op, t)| sql_cmp(&v, *op, t)) {
            out.push((k, v));
        }
    }
    out
}

// ---------------------------------------------------------------- random instances and queries

pub fn small_schema() -> Vec<TableSchema> {
    let col = |n: &str, t: DataType| ColumnDef {
        name: n.to_string(),
        dtype: t,
    };
    vec![
        TableSchema {
            name: "a".into(),
            columns: vec![
                col("k", DataType::Integer),
                col("x", DataType::Text),
                col("y", DataType::Integer),
            ],
            primary_key: vec![],
        },
        TableSchema {
            name: "b".into(),
            columns: vec![col("x", DataType::Text), col("z", DataType::Text)],
            primary_key: vec![],
        },
        TableSchema {
            name: "c".into(),
            columns: vec![
                col("z", DataType::Text),
                col("w", DataType::Integer),
                col("y", DataType::Integer),
            ],
            primary_key: vec![],
        },
    ]
}

pub const TEXTS: [&str; 3] = ["p", "q", "r"];

pub fn random_value(rng: &mut impl Rng, t: DataType) -> Value {
    if rng.random_ratio(1, 10) {
        return Value::Null;
    }
    match t {
        DataType::Integer => Value::Int(rng.random_range(0..4)),
        DataType::Real => Value::Real(rng.random_range(0..8) as f64 / 2.0),
        DataType::Text => Value::from(*TEXTS.choose(rng).unwrap()),
    }
}

pub fn random_instance(rng: &mut impl Rng, max_rows: usize) -> DatabaseCatalog {
    let relations = small_schema()
        .into_iter()
        .map(|s| {
            let n = rng.random_range(0..=max_rows);
            let rows = (0..n)
                .map(|_| {
                    s.columns
                        .iter()
                        .map(|c| random_value(rng, c.dtype))
                        .collect()
                })
                .collect();
            RelationInstance::new(s, rows).unwrap()
        })
        .collect();
    DatabaseCatalog::new("small", relations, Vocabulary::default()).unwrap()
}

fn pick_tables(rng: &mut impl Rng) -> Vec<TableSchema> {
    let mut all = small_schema();
    let n = rng.random_range(1..=3);
    let mut out = Vec::new();
    for _ in 0..n {
        let i = rng.random_range(0..all.len());
        out.push(all.remove(i));
    }
    out
}

fn columns_of(tables: &[TableSchema]) -> Vec<ColumnDef> {
    let mut cols: Vec<ColumnDef> = Vec::new();
    for t in tables {
        for c in &t.columns {
            if !cols.iter().any(|x| x.name == c.name) {
                cols.push(c.clone());
            }
        }
    }
    cols
}

fn random_op(rng: &mut impl Rng) -> CompareOp {
    *[
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ]
    .choose(rng)
    .unwrap()
}

fn literal_for(rng: &mut impl Rng, t: DataType) -> Value {
    match t {
        DataType::Text => Value::from(*TEXTS.choose(rng).unwrap()),
        _ => Value::Int(rng.random_range(-1..5)),
    }
}

/// A simple filter on one of `cols`.
fn random_compare(rng: &mut impl Rng, cols: &[ColumnDef]) -> Predicate {
    let c = cols.choose(rng).unwrap();
    let partner: Vec<&ColumnDef> = cols
        .iter()
        .filter(|x| x.name != c.name && (x.dtype.is_numeric() == c.dtype.is_numeric()))
        .collect();
    if !partner.is_empty() && rng.random_ratio(1, 5) {
        let p = partner.choose(rng).unwrap();
        return Predicate::Compare {
            left: Operand::Column(ColumnRef::new(&c.name)),
            op: random_op(rng),
            right: Operand::Column(ColumnRef::new(&p.name)),
        };
    }
    Predicate::compare(
        ColumnRef::new(&c.name),
        random_op(rng),
        literal_for(rng, c.dtype),
    )
}

/// A subquery over one table correlated with the outer alias `o`.
fn correlated(rng: &mut impl Rng, outer: &[ColumnDef]) -> Option<(Query, ColumnDef)> {
    let inner = small_schema().into_iter().collect::<Vec<_>>();
    let t = inner.choose(rng).unwrap().clone();
    let shared: Vec<&ColumnDef> = t
        .columns
        .iter()
        .filter(|c| outer.iter().any(|o| o.name == c.name))
        .collect();
    let link = shared.choose(rng)?;
    let out_col = t.columns.choose(rng).unwrap().clone();
    let mut s = Select::new(
        Projection::Items(vec![SelectItem::Column(ColumnRef::new(&out_col.name))]),
        vec![TableRef::new(&t.name)],
    );
    s.selection.push(Predicate::Compare {
        left: Operand::Column(ColumnRef::new(&link.name)),
        op: CompareOp::Eq,
        right: Operand::Column(ColumnRef::qualified("o", &link.name)),
    });
    if rng.random_bool(0.5) {
        s.selection.push(random_compare(rng, &t.columns));
    }
    Some((Query::select(s), out_col))
}

/// A well-typed query over the small schema.
pub fn random_query(rng: &mut impl Rng) -> Query {
    let tables = pick_tables(rng);
    let cols = columns_of(&tables);
    let mut from: Vec<TableRef> = tables.iter().map(|t| TableRef::new(&t.name)).collect();
    let mut s = Select::new(Projection::Wildcard, vec![]);
    for _ in 0..rng.random_range(0..3) {
        s.selection.push(random_compare(rng, &cols));
    }
    if rng.random_ratio(1, 3) {
        from[0].alias = Some("o".into());
        let outer_cols: Vec<ColumnDef> = tables[0].columns.clone();
        if let Some((sub, sub_col)) = correlated(rng, &outer_cols) {
            match rng.random_range(0..3) {
                0 => s.selection.push(Predicate::Exists {
                    subquery: Box::new(sub),
                    negated: rng.random_bool(0.5),
                }),
                1 => {
                    let same_type: Vec<&ColumnDef> = cols
                        .iter()
                        .filter(|c| c.dtype.is_numeric() == sub_col.dtype.is_numeric())
                        .collect();
                    if let Some(c) = same_type.choose(rng) {
                        s.selection.push(Predicate::InSubquery {
                            column: ColumnRef::new(&c.name),
                            subquery: Box::new(sub),
                            negated: rng.random_bool(0.5),
                        });
                    }
                }
                _ => {
                    // Containment against an uncorrelated set of the same column.
                    let t = small_schema()
                        .into_iter()
                        .find(|t| t.columns.iter().any(|c| c.name == sub_col.name))
                        .unwrap();
                    let mut fixed = Select::new(
                        Projection::Items(vec![SelectItem::Column(ColumnRef::new(&sub_col.name))]),
                        vec![TableRef::new(&t.name)],
                    );
                    fixed.selection.push(random_compare(rng, &t.columns));
                    s.selection.push(Predicate::Contains {
                        container: Box::new(sub),
                        contained: Box::new(Query::select(fixed)),
                    });
                }
            }
        }
    }
    s.from = from;
    if rng.random_ratio(1, 3) {
        let key = if rng.random_bool(0.7) {
            cols.choose(rng).cloned()
        } else {
            None
        };
        let numeric: Vec<&ColumnDef> = cols.iter().filter(|c| c.dtype.is_numeric()).collect();
        let mut items = Vec::new();
        if let Some(k) = &key {
            items.push(SelectItem::Column(ColumnRef::new(&k.name)));
        }
        let mut aggs: Vec<Aggregate> = Vec::new();
        for _ in 0..rng.random_range(1..3) {
            let a = match numeric.choose(rng) {
                Some(c) if rng.random_ratio(4, 5) => Aggregate {
                    func: *[
                        AggFunc::Sum,
                        AggFunc::Avg,
                        AggFunc::Min,
                        AggFunc::Max,
                        AggFunc::Count,
                    ]
                    .choose(rng)
                    .unwrap(),
                    arg: Some(ColumnRef::new(&c.name)),
                },
                _ => Aggregate {
                    func: AggFunc::Count,
                    arg: None,
                },
            };
            if !aggs.contains(&a) {
                aggs.push(a);
            }
        }
        items.extend(aggs.iter().cloned().map(SelectItem::Aggregate));
        s.projection = Projection::Items(items);
        s.group_by = key.map(|k| ColumnRef::new(&k.name));
        if rng.random_bool(0.5) {
            let a = aggs[0].clone();
            let value = match a.func {
                AggFunc::Min | AggFunc::Max => {
                    let c = a.arg.as_ref().unwrap();
                    literal_for(rng, cols.iter().find(|x| x.name == c.name).unwrap().dtype)
                }
                _ => Value::Int(rng.random_range(0..6)),
            };
            s.having = Some(Having {
                aggregate: a,
                op: random_op(rng),
                value,
            });
        }
    } else if rng.random_bool(0.6) {
        let mut picked: Vec<ColumnDef> = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let c = cols.choose(rng).unwrap().clone();
            if !picked.iter().any(|p| p.name == c.name) {
                picked.push(c);
            }
        }
        s.projection = Projection::Items(
            picked
                .into_iter()
                .map(|c| SelectItem::Column(ColumnRef::new(&c.name)))
                .collect(),
        );
    }
    let plain = s.group_by.is_none()
        && matches!(&s.projection, Projection::Items(i) if i.iter().all(|x| matches!(x, SelectItem::Column(_))))
        && s.selection
            .iter()
            .all(|p| matches!(p, Predicate::Compare { .. }));
    if plain && rng.random_ratio(1, 4) {
        // Everything minus the filtered rows.
        let mut all = s.clone();
        all.selection.clear();
        all.from = all.from.iter().map(|t| TableRef::new(&t.name)).collect();
        return Query::Except(Box::new(Query::select(all)), Box::new(Query::select(s)));
    }
    Query::select(s)
}

// ---------------------------------------------------------------- arbitrary syntax trees

const IDENTS: [&str; 10] = [
    "tracks",
    "Artist",
    "Label",
    "t",
    "x_1",
    "Media_Type",
    "sum",
    "order",
    "two words",
    "Select",
];

fn ident(rng: &mut impl Rng) -> String {
    IDENTS.choose(rng).unwrap().to_string()
}

fn column(rng: &mut impl Rng) -> ColumnRef {
    if rng.random_ratio(1, 4) {
        ColumnRef::qualified(ident(rng), ident(rng))
    } else {
        ColumnRef::new(ident(rng))
    }
}

fn literal(rng: &mut impl Rng) -> Value {
    match rng.random_range(0..3) {
        0 => Value::Int(rng.random_range(-3_000_000..3_000_000)),
        1 => Value::Real(rng.random_range(-4000..4000) as f64 / 8.0),
        _ => Value::from(
            *["Gone is Gone", "it's", "", "USA", "a\"b"]
                .choose(rng)
                .unwrap(),
        ),
    }
}

fn arb_operand(rng: &mut impl Rng) -> Operand {
    if rng.random_bool(0.5) {
        Operand::Column(column(rng))
    } else {
        Operand::Literal(literal(rng))
    }
}

fn arb_aggregate(rng: &mut impl Rng) -> Aggregate {
    let func = *[
        AggFunc::Sum,
        AggFunc::Avg,
        AggFunc::Min,
        AggFunc::Max,
        AggFunc::Count,
    ]
    .choose(rng)
    .unwrap();
    let arg = if func == AggFunc::Count && rng.random_bool(0.3) {
        None
    } else {
        Some(column(rng))
    };
    Aggregate { func, arg }
}

fn arb_predicate(rng: &mut impl Rng, depth: usize) -> Predicate {
    let nested = depth > 0 && rng.random_ratio(1, 3);
    if !nested {
        return Predicate::Compare {
            left: arb_operand(rng),
            op: random_op(rng),
            right: arb_operand(rng),
        };
    }
    match rng.random_range(0..3) {
        0 => Predicate::Contains {
            container: Box::new(arb_query(rng, depth - 1)),
            contained: Box::new(arb_query(rng, depth - 1)),
        },
        1 => Predicate::Exists {
            subquery: Box::new(arb_query(rng, depth - 1)),
            negated: rng.random_bool(0.5),
        },
        _ => Predicate::InSubquery {
            column: column(rng),
            subquery: Box::new(arb_query(rng, depth - 1)),
            negated: rng.random_bool(0.5),
        },
    }
}

fn arb_select(rng: &mut impl Rng, depth: usize) -> Select {
    let projection = if rng.random_ratio(1, 4) {
        Projection::Wildcard
    } else {
        Projection::Items(
            (0..rng.random_range(1..4))
                .map(|_| {
                    if rng.random_ratio(1, 3) {
                        SelectItem::Aggregate(arb_aggregate(rng))
                    } else {
                        SelectItem::Column(column(rng))
                    }
                })
                .collect(),
        )
    };
    let from = (0..rng.random_range(1..4))
        .map(|_| {
            if rng.random_ratio(1, 4) {
                TableRef::aliased(ident(rng), ident(rng))
            } else {
                TableRef::new(ident(rng))
            }
        })
        .collect();
    let mut s = Select::new(projection, from);
    s.selection = (0..rng.random_range(0..3))
        .map(|_| arb_predicate(rng, depth))
        .collect();
    if rng.random_ratio(1, 4) {
        s.group_by = Some(column(rng));
    }
    if rng.random_ratio(1, 5) {
        s.having = Some(Having {
            aggregate: arb_aggregate(rng),
            op: random_op(rng),
            value: literal(rng),
        });
    }
    s
}

/// Any tree the renderer accepts, not necessarily meaningful.
pub fn arb_query(rng: &mut impl Rng, depth: usize) -> Query {
    if depth > 0 && rng.random_ratio(1, 5) {
        Query::Except(
            Box::new(arb_query(rng, depth - 1)),
            Box::new(arb_query(rng, depth - 1)),
        )
    } else {
        Query::select(arb_select(rng, depth))
    }
}
