//! Query evaluation. Each SELECT is first bound against the catalog (names
//! resolved to positions, types checked), then run. Binding happens before
//! any row is touched, so errors surface on empty instances too.

use std::collections::BTreeMap;

use thiserror::Error;

use super::table::{natural_join, ResultTable};
use crate::catalog::DatabaseCatalog;
use crate::sql::ast::*;
use crate::sql::desugar_contains;
use crate::value::{DataType, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown table '{name}'")]
    UnknownTable { name: String },
    #[error("unknown column '{name}'")]
    UnknownColumn { name: String },
    #[error("type mismatch: {detail}")]
    TypeMismatch { detail: String },
    #[error("'{column}' must appear in GROUP BY or inside an aggregate")]
    NotGrouped { column: String },
    #[error("column '{name}' appears twice in the result")]
    DuplicateColumn { name: String },
}

#[derive(Debug, Clone)]
struct Col {
    name: String,
    /// Lowercase names of the tables (or their aliases) that supply it.
    sources: Vec<String>,
    dtype: Option<DataType>,
}

/// A relation during binding: columns plus materialized rows.
#[derive(Debug, Clone)]
struct Rel {
    cols: Vec<Col>,
    rows: Vec<Vec<Value>>,
}

/// Position of a column: how many scopes out, and where in that scope.
#[derive(Debug, Clone, Copy)]
struct Slot {
    depth: usize,
    index: usize,
}

#[derive(Debug)]
enum Term {
    Const(Value),
    Slot(Slot),
}

#[derive(Debug)]
enum Filter {
    Compare(Term, CompareOp, Term),
    Exists(Box<Plan>, bool),
    In(Slot, Box<Plan>, bool),
}

#[derive(Debug)]
enum Output {
    All,
    Columns(Vec<usize>),
    Grouped {
        key: Option<usize>,
        items: Vec<GroupItem>,
        having: Option<(AggSpec, CompareOp, Value)>,
    },
}

#[derive(Debug, Clone, Copy)]
enum GroupItem {
    Key,
    Agg(AggSpec),
}

#[derive(Debug, Clone, Copy)]
struct AggSpec {
    func: AggFunc,
    arg: Option<usize>,
}

#[derive(Debug)]
enum Plan {
    Select {
        source: Vec<Vec<Value>>,
        filters: Vec<Filter>,
        output: Output,
    },
    Except(Box<Plan>, Box<Plan>),
}

/// Output schema handed to enclosing scopes for arity and type checks.
#[derive(Debug, Clone)]
struct Shape {
    columns: Vec<String>,
    types: Vec<Option<DataType>>,
}

/// Evaluates a query. `CONTAINS` is rewritten before binding.
pub fn execute(query: &Query, catalog: &DatabaseCatalog) -> Result<ResultTable, EngineError> {
    let query = desugar_contains(query);
    let (plan, shape) = bind(&query, catalog, &[])?;
    let rows = run(&plan, &mut Vec::new());
    Ok(ResultTable::new(shape.columns, rows))
}

/// Binds the query without running it: every table and column must exist
/// and every comparison must be between compatible types.
pub fn check(query: &Query, catalog: &DatabaseCatalog) -> Result<(), EngineError> {
    let query = desugar_contains(query);
    bind(&query, catalog, &[]).map(|_| ())
}

fn base_relation(catalog: &DatabaseCatalog, t: &TableRef) -> Result<Rel, EngineError> {
    let rel = catalog
        .relations()
        .iter()
        .find(|r| r.name().eq_ignore_ascii_case(&t.name))
        .ok_or_else(|| EngineError::UnknownTable {
            name: t.name.clone(),
        })?;
    let mut sources = vec![t.name.to_lowercase()];
    if let Some(a) = &t.alias {
        sources = vec![a.to_lowercase()];
    }
    Ok(Rel {
        cols: rel
            .schema
            .columns
            .iter()
            .map(|c| Col {
                name: c.name.clone(),
                sources: sources.clone(),
                dtype: Some(c.dtype),
            })
            .collect(),
        rows: rel.rows.clone(),
    })
}

fn join(a: Rel, b: Rel) -> Result<Rel, EngineError> {
    for ca in &a.cols {
        if let Some(cb) = b
            .cols
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(&ca.name))
        {
            if !types_compatible(ca.dtype, cb.dtype) {
                return Err(EngineError::TypeMismatch {
                    detail: format!(
                        "natural join on '{}' compares {} with {}",
                        ca.name,
                        show(ca.dtype),
                        show(cb.dtype)
                    ),
                });
            }
        }
    }
    let names = |r: &Rel| r.cols.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
    let joined = natural_join(
        &ResultTable::new(names(&a), a.rows),
        &ResultTable::new(names(&b), b.rows),
    );
    let mut cols = a.cols;
    for c in b.cols {
        match cols
            .iter_mut()
            .find(|x| x.name.eq_ignore_ascii_case(&c.name))
        {
            Some(x) => x.sources.extend(c.sources),
            None => cols.push(c),
        }
    }
    Ok(Rel {
        cols,
        rows: joined.rows,
    })
}

fn show(t: Option<DataType>) -> String {
    t.map(|t| t.to_string())
        .unwrap_or_else(|| "null".to_string())
}

fn types_compatible(a: Option<DataType>, b: Option<DataType>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y || (x.is_numeric() && y.is_numeric()),
        _ => true,
    }
}

fn resolve(c: &ColumnRef, scopes: &[&[Col]]) -> Result<(Slot, Option<DataType>), EngineError> {
    let qualifier = c.qualifier.as_ref().map(|q| q.to_lowercase());
    let mut qualifier_seen = qualifier.is_none();
    for (depth, scope) in scopes.iter().rev().enumerate() {
        for (index, col) in scope.iter().enumerate() {
            if let Some(q) = &qualifier {
                if !col.sources.contains(q) {
                    continue;
                }
                qualifier_seen = true;
            }
            if col.name.eq_ignore_ascii_case(&c.name) {
                return Ok((Slot { depth, index }, col.dtype));
            }
        }
    }
    if !qualifier_seen {
        return Err(EngineError::UnknownTable {
            name: c.qualifier.clone().unwrap_or_default(),
        });
    }
    Err(EngineError::UnknownColumn {
        name: c.to_string(),
    })
}

fn bind(
    query: &Query,
    catalog: &DatabaseCatalog,
    outer: &[&[Col]],
) -> Result<(Plan, Shape), EngineError> {
    match query {
        Query::Except(a, b) => {
            let (pa, sa) = bind(a, catalog, outer)?;
            let (pb, sb) = bind(b, catalog, outer)?;
            if sa.columns.len() != sb.columns.len() {
                return Err(EngineError::TypeMismatch {
                    detail: format!(
                        "EXCEPT operands have {} and {} columns",
                        sa.columns.len(),
                        sb.columns.len()
                    ),
                });
            }
            for (x, y) in sa.types.iter().zip(&sb.types) {
                if !types_compatible(*x, *y) {
                    return Err(EngineError::TypeMismatch {
                        detail: format!("EXCEPT pairs {} with {}", show(*x), show(*y)),
                    });
                }
            }
            Ok((Plan::Except(Box::new(pa), Box::new(pb)), sa))
        }
        Query::Select(s) => bind_select(s, catalog, outer),
    }
}

fn bind_select(
    s: &Select,
    catalog: &DatabaseCatalog,
    outer: &[&[Col]],
) -> Result<(Plan, Shape), EngineError> {
    let mut rel: Option<Rel> = None;
    for t in &s.from {
        let r = base_relation(catalog, t)?;
        rel = Some(match rel {
            None => r,
            Some(acc) => join(acc, r)?,
        });
    }
    let rel = rel.ok_or_else(|| EngineError::UnknownTable {
        name: String::new(),
    })?;
    let mut scopes: Vec<&[Col]> = outer.to_vec();
    scopes.push(&rel.cols);

    let mut filters = Vec::new();
    for p in &s.selection {
        filters.push(bind_predicate(p, catalog, &scopes)?);
    }

    let local = |c: &ColumnRef| -> Result<(usize, Option<DataType>), EngineError> {
        let (slot, t) = resolve(c, &scopes)?;
        if slot.depth != 0 {
            return Err(EngineError::UnknownColumn {
                name: c.to_string(),
            });
        }
        Ok((slot.index, t))
    };
    let agg_spec = |a: &Aggregate| -> Result<(AggSpec, Option<DataType>), EngineError> {
        let (arg, t) = match &a.arg {
            Some(c) => {
                let (i, t) = local(c)?;
                (Some(i), t)
            }
            None => (None, None),
        };
        if matches!(a.func, AggFunc::Sum | AggFunc::Avg) && !t.is_some_and(|t| t.is_numeric()) {
            return Err(EngineError::TypeMismatch {
                detail: format!("{} needs a numeric column", a.func.keyword()),
            });
        }
        let out = match a.func {
            AggFunc::Count => Some(DataType::Integer),
            AggFunc::Avg => Some(DataType::Real),
            _ => t,
        };
        Ok((AggSpec { func: a.func, arg }, out))
    };

    let has_agg = matches!(&s.projection, Projection::Items(items) if items.iter().any(|i| matches!(i, SelectItem::Aggregate(_))));
    let (output, columns, types) = if has_agg || s.group_by.is_some() || s.having.is_some() {
        let key = match &s.group_by {
            Some(g) => Some(local(g)?),
            None => None,
        };
        let mut items = Vec::new();
        let mut columns = Vec::new();
        let mut types = Vec::new();
        match &s.projection {
            Projection::Wildcard => {
                let Some((k, t)) = key else {
                    return Err(EngineError::NotGrouped {
                        column: "*".to_string(),
                    });
                };
                if rel.cols.len() != 1 {
                    let other = rel
                        .cols
                        .iter()
                        .enumerate()
                        .find(|(i, _)| *i != k)
                        .map(|(_, c)| c.name.clone());
                    return Err(EngineError::NotGrouped {
                        column: other.unwrap_or_default(),
                    });
                }
                items.push(GroupItem::Key);
                columns.push(rel.cols[k].name.clone());
                types.push(t);
            }
            Projection::Items(list) => {
                for item in list {
                    match item {
                        SelectItem::Column(c) => {
                            let (i, t) = local(c)?;
                            if key.map(|k| k.0) != Some(i) {
                                return Err(EngineError::NotGrouped {
                                    column: c.to_string(),
                                });
                            }
                            items.push(GroupItem::Key);
                            columns.push(rel.cols[i].name.clone());
                            types.push(t);
                        }
                        SelectItem::Aggregate(a) => {
                            let (spec, t) = agg_spec(a)?;
                            items.push(GroupItem::Agg(spec));
                            columns.push(a.to_string());
                            types.push(t);
                        }
                    }
                }
            }
        }
        let having = match &s.having {
            Some(h) => {
                let (spec, t) = agg_spec(&h.aggregate)?;
                if !t.is_none_or(|t| h.value.compatible_with(t)) {
                    return Err(EngineError::TypeMismatch {
                        detail: format!(
                            "HAVING compares {} with {}",
                            h.aggregate,
                            h.value.to_sql()
                        ),
                    });
                }
                Some((spec, h.op, h.value.clone()))
            }
            None => None,
        };
        (
            Output::Grouped {
                key: key.map(|k| k.0),
                items,
                having,
            },
            columns,
            types,
        )
    } else {
        match &s.projection {
            Projection::Wildcard => (
                Output::All,
                rel.cols.iter().map(|c| c.name.clone()).collect(),
                rel.cols.iter().map(|c| c.dtype).collect(),
            ),
            Projection::Items(list) => {
                let mut idx = Vec::new();
                let mut columns = Vec::new();
                let mut types = Vec::new();
                for item in list {
                    if let SelectItem::Column(c) = item {
                        let (i, t) = local(c)?;
                        idx.push(i);
                        columns.push(rel.cols[i].name.clone());
                        types.push(t);
                    }
                }
                (Output::Columns(idx), columns, types)
            }
        }
    };
    for (k, c) in columns.iter().enumerate() {
        if columns[..k].iter().any(|p| p.eq_ignore_ascii_case(c)) {
            return Err(EngineError::DuplicateColumn { name: c.clone() });
        }
    }
    Ok((
        Plan::Select {
            source: rel.rows,
            filters,
            output,
        },
        Shape { columns, types },
    ))
}

fn bind_operand(o: &Operand, scopes: &[&[Col]]) -> Result<(Term, Option<DataType>), EngineError> {
    match o {
        Operand::Literal(v) => Ok((Term::Const(v.clone()), v.data_type())),
        Operand::Column(c) => {
            let (slot, t) = resolve(c, scopes)?;
            Ok((Term::Slot(slot), t))
        }
    }
}

fn bind_predicate(
    p: &Predicate,
    catalog: &DatabaseCatalog,
    scopes: &[&[Col]],
) -> Result<Filter, EngineError> {
    match p {
        Predicate::Compare { left, op, right } => {
            let (l, lt) = bind_operand(left, scopes)?;
            let (r, rt) = bind_operand(right, scopes)?;
            if !types_compatible(lt, rt) {
                return Err(EngineError::TypeMismatch {
                    detail: format!(
                        "{left} {} {right} compares {} with {}",
                        op.symbol(),
                        show(lt),
                        show(rt)
                    ),
                });
            }
            Ok(Filter::Compare(l, *op, r))
        }
        Predicate::Exists { subquery, negated } => {
            let (plan, _) = bind(subquery, catalog, scopes)?;
            Ok(Filter::Exists(Box::new(plan), *negated))
        }
        Predicate::InSubquery {
            column,
            subquery,
            negated,
        } => {
            let (slot, t) = resolve(column, scopes)?;
            let (plan, shape) = bind(subquery, catalog, scopes)?;
            if shape.columns.len() != 1 || !types_compatible(t, shape.types[0]) {
                return Err(EngineError::TypeMismatch {
                    detail: format!("IN needs a single {} column", show(t)),
                });
            }
            Ok(Filter::In(slot, Box::new(plan), *negated))
        }
        Predicate::Contains { .. } => unreachable!("containment is desugared before binding"),
    }
}

/// `env` holds the current row of every enclosing scope, innermost last.
fn run(plan: &Plan, env: &mut Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    match plan {
        Plan::Except(a, b) => {
            let right = run(b, env);
            let mut seen = std::collections::BTreeSet::new();
            run(a, env)
                .into_iter()
                .filter(|r| !right.contains(r) && seen.insert(r.clone()))
                .collect()
        }
        Plan::Select {
            source,
            filters,
            output,
        } => {
            let mut kept = Vec::new();
            for row in source {
                env.push(row.clone());
                let ok = filters.iter().all(|f| holds(f, env));
                env.pop();
                if ok {
                    kept.push(row);
                }
            }
            match output {
                Output::All => kept.into_iter().cloned().collect(),
                Output::Columns(idx) => kept
                    .into_iter()
                    .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
                    .collect(),
                Output::Grouped { key, items, having } => {
                    group(&kept, *key, items, having.as_ref())
                }
            }
        }
    }
}

fn value_of<'e>(t: &'e Term, env: &'e [Vec<Value>]) -> &'e Value {
    match t {
        Term::Const(v) => v,
        Term::Slot(s) => &env[env.len() - 1 - s.depth][s.index],
    }
}

/// NULL on either side never satisfies a comparison.
fn compare(a: &Value, op: CompareOp, b: &Value) -> bool {
    !a.is_null() && !b.is_null() && op.holds(a.cmp(b))
}

fn holds(f: &Filter, env: &mut Vec<Vec<Value>>) -> bool {
    match f {
        Filter::Compare(l, op, r) => compare(value_of(l, env), *op, value_of(r, env)),
        Filter::Exists(plan, negated) => run(plan, env).is_empty() == *negated,
        Filter::In(slot, plan, negated) => {
            let v = env[env.len() - 1 - slot.depth][slot.index].clone();
            if v.is_null() {
                return false;
            }
            let found = run(plan, env).iter().any(|r| r[0] == v);
            found != *negated
        }
    }
}

fn group(
    rows: &[&Vec<Value>],
    key: Option<usize>,
    items: &[GroupItem],
    having: Option<&(AggSpec, CompareOp, Value)>,
) -> Vec<Vec<Value>> {
    let mut groups: BTreeMap<Value, Vec<&Vec<Value>>> = BTreeMap::new();
    match key {
        Some(k) => {
            for r in rows {
                groups.entry(r[k].clone()).or_default().push(r);
            }
        }
        // Without GROUP BY the whole input is one group, even when empty.
        None => {
            groups.insert(Value::Null, rows.to_vec());
        }
    }
    let mut out = Vec::new();
    for (k, members) in groups {
        if let Some((spec, op, v)) = having {
            if !compare(&aggregate(*spec, &members), *op, v) {
                continue;
            }
        }
        out.push(
            items
                .iter()
                .map(|i| match i {
                    GroupItem::Key => k.clone(),
                    GroupItem::Agg(spec) => aggregate(*spec, &members),
                })
                .collect(),
        );
    }
    out
}

/// NULLs are skipped; SUM, AVG, MIN and MAX of nothing are NULL.
pub(crate) fn aggregate_values(func: AggFunc, values: &[Value]) -> Value {
    let present: Vec<&Value> = values.iter().filter(|v| !v.is_null()).collect();
    match func {
        AggFunc::Count => Value::Int(present.len() as i64),
        _ if present.is_empty() => Value::Null,
        AggFunc::Min => present
            .iter()
            .min()
            .map(|v| (*v).clone())
            .unwrap_or(Value::Null),
        AggFunc::Max => present
            .iter()
            .max()
            .map(|v| (*v).clone())
            .unwrap_or(Value::Null),
        AggFunc::Sum => {
            if present.iter().all(|v| matches!(v, Value::Int(_))) {
                let mut acc: i64 = 0;
                for v in &present {
                    if let Value::Int(i) = v {
                        match acc.checked_add(*i) {
                            Some(s) => acc = s,
                            None => {
                                return Value::Real(present.iter().filter_map(|v| v.as_f64()).sum())
                            }
                        }
                    }
                }
                Value::Int(acc)
            } else {
                Value::Real(present.iter().filter_map(|v| v.as_f64()).sum())
            }
        }
        AggFunc::Avg => {
            let sum: f64 = present.iter().filter_map(|v| v.as_f64()).sum();
            Value::Real(sum / present.len() as f64)
        }
    }
}

fn aggregate(spec: AggSpec, members: &[&Vec<Value>]) -> Value {
    match spec.arg {
        Some(i) => {
            let values: Vec<Value> = members.iter().map(|r| r[i].clone()).collect();
            aggregate_values(spec.func, &values)
        }
        None => Value::Int(members.len() as i64),
    }
}
