//! Builds SQL from an analyzed query and its schema links.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use crate::catalog::DatabaseCatalog;
use crate::matcher::{name_similarity, normalize_name, MatchConfig, MatchResult};
use crate::text::lexicon::{
    is_possessive_determiner, is_relative_pronoun, is_universal_quantifier,
};
use crate::text::{Tag, TaggedQuery, Token, TokenKind};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryClass {
    Wildcard,
    Projection,
    Selection,
    Join,
    Division,
    Aggregate,
}

impl QueryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryClass::Wildcard => "wildcard",
            QueryClass::Projection => "projection",
            QueryClass::Selection => "selection",
            QueryClass::Join => "join",
            QueryClass::Division => "division",
            QueryClass::Aggregate => "aggregate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("could not tell which column '{literal}' refers to")]
    UnboundLiteral { literal: String },
    #[error("'{literal}' appears in several columns ({})", columns.join(", "))]
    AmbiguousLiteral {
        literal: String,
        columns: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundBy {
    /// A neighbouring word names the column ("composer Jimi Hendrix").
    Cue,
    /// The value occurs in exactly one column of the instance.
    ValueScan,
    /// "top N" against a ranking column.
    Rank,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundLiteral {
    pub literal: String,
    pub position: usize,
    pub value: Value,
    pub table: String,
    #[serde(skip)]
    pub table_index: usize,
    pub column: String,
    #[serde(skip)]
    pub column_index: usize,
    pub op: CompareOp,
    pub by: BoundBy,
    /// Position of the cue word, when one was used.
    pub cue: Option<usize>,
}

type Loc = (usize, usize);

struct Ctx<'a> {
    q: &'a TaggedQuery,
    m: &'a MatchResult,
    catalog: &'a DatabaseCatalog,
    tau: f64,
}

impl<'a> Ctx<'a> {
    fn tok(&self, i: usize) -> &'a Token {
        &self.q.tokens[i]
    }

    fn dtype(&self, loc: Loc) -> crate::value::DataType {
        self.catalog.column_def(loc).dtype
    }

    fn column_name(&self, loc: Loc) -> &'a str {
        &self.catalog.column_def(loc).name
    }

    fn table_name(&self, t: usize) -> &'a str {
        self.catalog.relations()[t].name()
    }

    fn contains_value(&self, loc: Loc, value: &Value) -> bool {
        self.catalog.columns_containing(value).contains(&loc)
    }

    /// Words that never act as column cues.
    fn skippable(&self, t: &Token) -> bool {
        t.is_command() || matches!(t.tag, Tag::Stop | Tag::Preposition | Tag::Other)
    }

    /// The column a word refers to: its binding from the matcher, else the
    /// closest column of a selected table when that clears the floor.
    fn resolve(&self, i: usize, tables: &[usize]) -> Option<Loc> {
        let t = self.tok(i);
        if t.kind != TokenKind::Word || t.literal_value().is_some() || self.skippable(t) {
            return None;
        }
        if let Some(b) = self.m.binding_at(t.position) {
            return Some((b.table_index, b.column_index));
        }
        if self.m.is_table_term(t.position) {
            return None;
        }
        let vocabulary = self.catalog.vocabulary();
        let mut best: Option<(Loc, f64)> = None;
        for &ti in tables {
            for (ci, col) in self.catalog.relations()[ti]
                .schema
                .columns
                .iter()
                .enumerate()
            {
                let s = name_similarity(&t.lemma, &col.name, vocabulary);
                if s >= self.tau && best.is_none_or(|(_, b)| s > b) {
                    best = Some(((ti, ci), s));
                }
            }
        }
        best.map(|(loc, _)| loc)
    }

    fn prev_content(&self, i: usize) -> Option<usize> {
        (0..i).rev().find(|&j| self.tok(j).tag != Tag::Stop)
    }

    fn next_content(&self, i: usize) -> Option<usize> {
        (i + 1..self.q.tokens.len()).find(|&j| self.tok(j).tag != Tag::Stop)
    }

    /// Comparator expressed right before token `i`.
    fn comparator(&self, i: usize) -> CompareOp {
        let lemma = |k: usize| self.tok(k).lemma.as_str();
        if i >= 2 && lemma(i - 1) == "than" {
            match lemma(i - 2) {
                "more" | "greater" | "larger" | "higher" | "bigger" => return CompareOp::Gt,
                "less" | "fewer" | "lower" | "smaller" => return CompareOp::Lt,
                _ => {}
            }
        }
        if i >= 2 && lemma(i - 2) == "at" {
            match lemma(i - 1) {
                "least" => return CompareOp::Ge,
                "most" => return CompareOp::Le,
                _ => {}
            }
        }
        if i >= 1 {
            match lemma(i - 1) {
                "over" | "above" | "exceeding" => return CompareOp::Gt,
                "under" | "below" => return CompareOp::Lt,
                _ => {}
            }
        }
        CompareOp::Eq
    }

    fn rank_column(&self, tables: &[usize]) -> Option<Loc> {
        let vocabulary = self.catalog.vocabulary();
        let is_rank = |name: &str| {
            let n = normalize_name(name);
            matches!(n.as_str(), "standing" | "rank" | "ranking" | "position")
                || ["standing", "rank", "position"]
                    .iter()
                    .any(|w| vocabulary.same_group(&n, w))
        };
        let search = |ts: &mut dyn Iterator<Item = usize>| {
            ts.flat_map(|t| {
                self.catalog.relations()[t]
                    .schema
                    .columns
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.dtype.is_numeric() && is_rank(&c.name))
                    .map(move |(c, _)| (t, c))
                    .collect::<Vec<_>>()
            })
            .next()
        };
        search(&mut tables.iter().copied())
            .or_else(|| search(&mut (0..self.catalog.relations().len())))
    }
}

/// Output of the binding pass: predicates plus the bookkeeping the
/// builders need.
struct Bound {
    literals: Vec<BoundLiteral>,
    consumed: BTreeSet<usize>,
    tables: Vec<usize>,
}

fn bind(ctx: &Ctx) -> Result<Bound, GenerateError> {
    let mut tables = ctx.m.table_indices();
    let mut consumed: BTreeSet<usize> = BTreeSet::new();
    let mut literals = Vec::new();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let n = ctx.q.tokens.len();

    // "top N" first, so the ranking word it absorbs is not reused as a cue.
    for i in 0..n {
        let t = ctx.tok(i);
        if t.kind != TokenKind::Number {
            continue;
        }
        let after_top = ctx
            .prev_content(i)
            .is_some_and(|p| ctx.tok(p).lemma == "top");
        if !after_top {
            continue;
        }
        let Some(loc) = ctx.rank_column(&tables) else {
            continue;
        };
        if !tables.contains(&loc.0) {
            tables.push(loc.0);
        }
        let top = ctx.prev_content(i).unwrap_or(i);
        for j in [ctx.next_content(i), top.checked_sub(1)]
            .into_iter()
            .flatten()
        {
            if ctx.resolve(j, &tables) == Some(loc) {
                consumed.insert(ctx.tok(j).position);
            }
        }
        literals.push(BoundLiteral {
            literal: t.phrase.clone(),
            position: t.position,
            value: t.literal_value().unwrap_or(Value::Null),
            table: ctx.table_name(loc.0).to_string(),
            table_index: loc.0,
            column: ctx.column_name(loc).to_string(),
            column_index: loc.1,
            op: CompareOp::Le,
            by: BoundBy::Rank,
            cue: None,
        });
        done.insert(i);
    }

    for i in 0..n {
        if done.contains(&i) {
            continue;
        }
        let t = ctx.tok(i);
        let Some(value) = t.literal_value() else {
            continue;
        };
        // A lone capitalized word without a column word right next to it is
        // only a value when the database holds it and it is not a locative
        // qualifier ("in USA"); otherwise it is a name of no consequence
        // ("Hey Cyrus").
        let single = t.kind == TokenKind::Word && t.position == t.end_position;
        let op = ctx.comparator(i);
        let mut cues: Vec<(usize, usize, bool)> = Vec::new();
        for left in [true, false] {
            let mut j = i;
            let mut dist = 0;
            loop {
                let next = if left {
                    j.checked_sub(1)
                } else {
                    (j + 1 < n).then_some(j + 1)
                };
                let Some(k) = next else { break };
                j = k;
                dist += 1;
                let tk = ctx.tok(k);
                if tk.kind == TokenKind::Punctuation || tk.literal_value().is_some() {
                    break;
                }
                if ctx.skippable(tk) {
                    if single {
                        break;
                    }
                    continue;
                }
                cues.push((k, dist, left));
                break;
            }
        }
        let mut options: Vec<(Loc, usize, usize, bool, bool)> = cues
            .into_iter()
            .filter(|&(k, _, _)| !consumed.contains(&ctx.tok(k).position))
            .filter_map(|(k, dist, left)| {
                let loc = ctx.resolve(k, &tables)?;
                value
                    .compatible_with(ctx.dtype(loc))
                    .then(|| (loc, k, dist, left, ctx.contains_value(loc, &value)))
            })
            .collect();
        options.sort_by(|a, b| b.4.cmp(&a.4).then(a.2.cmp(&b.2)).then(b.3.cmp(&a.3)));
        // An equality on a cue column that never holds the value, when some
        // other column does, is a misread cue ("albums by Brian Eno").
        if op == CompareOp::Eq
            && matches!(value, Value::Text(_))
            && options.first().is_some_and(|o| !o.4)
            && !ctx.catalog.columns_containing(&value).is_empty()
        {
            options.clear();
        }
        if let Some(&(loc, k, _, _, _)) = options.first() {
            consumed.insert(ctx.tok(k).position);
            literals.push(BoundLiteral {
                literal: literal_text(t),
                position: t.position,
                value: canonical(ctx, &value),
                table: ctx.table_name(loc.0).to_string(),
                table_index: loc.0,
                column: ctx.column_name(loc).to_string(),
                column_index: loc.1,
                op,
                by: BoundBy::Cue,
                cue: Some(ctx.tok(k).position),
            });
            continue;
        }
        let locs: Vec<Loc> = ctx
            .catalog
            .columns_containing(&value)
            .into_iter()
            .filter(|&l| value.compatible_with(ctx.dtype(l)))
            .collect();
        let local: Vec<Loc> = locs
            .iter()
            .copied()
            .filter(|l| tables.contains(&l.0))
            .collect();
        let locative = i > 0 && ctx.tok(i - 1).lemma == "in";
        if single && (locs.is_empty() || locative) {
            continue;
        }
        let pool = if local.is_empty() { locs } else { local };
        let mut pool = pool;
        pool.sort();
        let names: BTreeSet<String> = pool
            .iter()
            .map(|&l| ctx.column_name(l).to_lowercase())
            .collect();
        match names.len() {
            0 => {
                return Err(GenerateError::UnboundLiteral {
                    literal: literal_text(t),
                })
            }
            1 => {
                let loc = pool[0];
                if !tables.contains(&loc.0) {
                    tables.push(loc.0);
                }
                literals.push(BoundLiteral {
                    literal: literal_text(t),
                    position: t.position,
                    value: canonical(ctx, &value),
                    table: ctx.table_name(loc.0).to_string(),
                    table_index: loc.0,
                    column: ctx.column_name(loc).to_string(),
                    column_index: loc.1,
                    op,
                    by: BoundBy::ValueScan,
                    cue: None,
                });
            }
            _ => {
                let mut columns: Vec<String> = Vec::new();
                for &l in &pool {
                    let c = format!("{}.{}", ctx.table_name(l.0), ctx.column_name(l));
                    if !columns.contains(&c) {
                        columns.push(c);
                    }
                }
                return Err(GenerateError::AmbiguousLiteral {
                    literal: literal_text(t),
                    columns,
                });
            }
        }
    }
    tables.sort_unstable();
    tables.dedup();
    Ok(Bound {
        literals,
        consumed,
        tables,
    })
}

fn literal_text(t: &Token) -> String {
    match t.kind {
        TokenKind::QuotedLiteral => crate::text::unquote(&t.surface),
        _ => t.phrase.clone(),
    }
}

/// Text literals take the spelling stored in the database.
fn canonical(ctx: &Ctx, value: &Value) -> Value {
    match value {
        Value::Text(s) => Value::Text(ctx.catalog.canonical_text(s).unwrap_or_else(|| s.clone())),
        other => other.clone(),
    }
}

struct Division {
    project: Loc,
    set: Loc,
    entity: usize,
}

struct AggregatePlan {
    func: AggFunc,
    measure: Loc,
    group: Option<Loc>,
    threshold: Option<usize>,
}

struct Plan {
    bound: Bound,
    division: Option<Division>,
    aggregate: Option<AggregatePlan>,
    projection: Vec<Loc>,
}

fn aggregate_word(lemma: &str) -> Option<AggFunc> {
    match lemma {
        "sum" | "total" => Some(AggFunc::Sum),
        "average" | "avg" | "mean" => Some(AggFunc::Avg),
        "count" => Some(AggFunc::Count),
        "maximum" | "max" | "highest" => Some(AggFunc::Max),
        "minimum" | "min" | "lowest" => Some(AggFunc::Min),
        _ => None,
    }
}

fn plan(ctx: &Ctx) -> Result<Plan, GenerateError> {
    let bound = bind(ctx)?;
    let tables = bound.tables.clone();
    let n = ctx.q.tokens.len();

    // Attribute words in sentence order.
    let mut attrs: Vec<(usize, Loc)> = Vec::new();
    for b in ctx.m.bindings() {
        if bound.consumed.contains(&b.position) {
            continue;
        }
        if let Some(i) = ctx.q.index_of(b.position) {
            attrs.push((i, (b.table_index, b.column_index)));
        }
    }
    attrs.sort();
    let mut projection: Vec<(usize, Loc)> = Vec::new();
    for (i, loc) in attrs {
        if !projection.iter().any(|&(_, l)| {
            ctx.column_name(l)
                .eq_ignore_ascii_case(ctx.column_name(loc))
        }) {
            projection.push((i, loc));
        }
    }
    // "X and their Y" lists the owned thing first.
    let mut k = 0;
    while k + 1 < projection.len() {
        let (a, b) = (projection[k].0, projection[k + 1].0);
        let between: Vec<&str> = (a + 1..b).map(|j| ctx.tok(j).lemma.as_str()).collect();
        if between.len() == 2 && between[0] == "and" && is_possessive_determiner(between[1]) {
            projection.swap(k, k + 1);
            k += 2;
        } else {
            k += 1;
        }
    }
    let projection_locs: Vec<Loc> = projection.iter().map(|p| p.1).collect();

    let division = detect_division(ctx, &bound, &tables);
    let aggregate = if division.is_some() {
        None
    } else {
        detect_aggregate(ctx, &bound, &tables, n)
    };
    Ok(Plan {
        bound,
        division,
        aggregate,
        projection: projection_locs,
    })
}

fn detect_division(ctx: &Ctx, bound: &Bound, tables: &[usize]) -> Option<Division> {
    let n = ctx.q.tokens.len();
    let mut scoped: Vec<Loc> = Vec::new();
    for u in 0..n {
        if !is_universal_quantifier(&ctx.tok(u).lemma) {
            continue;
        }
        let target = (u + 1..n).find(|&j| !matches!(ctx.tok(j).tag, Tag::Stop | Tag::Preposition));
        if let Some(j) = target {
            if ctx.tok(j).tag == Tag::Noun {
                if let Some(loc) = ctx.resolve(j, tables) {
                    scoped.push(loc);
                }
            }
        }
    }
    if scoped.is_empty() {
        return None;
    }
    let entity = bound
        .literals
        .iter()
        .position(|l| matches!(l.value, Value::Text(_)) && l.op == CompareOp::Eq)?;
    let mut verbs: Vec<&str> = ctx
        .q
        .tokens
        .iter()
        .filter(|t| t.tag == Tag::Verb && !t.is_command())
        .map(|t| t.lemma.as_str())
        .collect();
    let verb_count = verbs.len();
    verbs.sort_unstable();
    verbs.dedup();
    let repeated_verb = verbs.len() < verb_count;
    let resolved: Vec<Loc> = (0..n).filter_map(|j| ctx.resolve(j, tables)).collect();
    let distinct: BTreeSet<Loc> = resolved.iter().copied().collect();
    let repeated_column = distinct.len() < resolved.len();
    if !(repeated_verb || repeated_column) {
        return None;
    }
    let project = (0..n)
        .filter(|&j| ctx.tok(j).tag == Tag::Noun)
        .find_map(|j| ctx.resolve(j, tables))?;
    let set = scoped.iter().rev().copied().find(|&l| l != project)?;
    Some(Division {
        project,
        set,
        entity,
    })
}

fn detect_aggregate(ctx: &Ctx, bound: &Bound, tables: &[usize], n: usize) -> Option<AggregatePlan> {
    let group = (0..n.saturating_sub(1)).find_map(|j| {
        let t = ctx.tok(j);
        if t.tag != Tag::Noun || !is_relative_pronoun(&ctx.tok(j + 1).lemma) {
            return None;
        }
        let loc = ctx.resolve(j, tables)?;
        (!ctx.dtype(loc).is_numeric()).then_some(loc)
    });
    let group = group.or_else(|| {
        (1..n).find_map(|j| {
            let prev = ctx.tok(j - 1).lemma.as_str();
            if !matches!(prev, "per" | "each" | "by") || ctx.tok(j).tag != Tag::Noun {
                return None;
            }
            let loc = ctx.resolve(j, tables)?;
            (!ctx.dtype(loc).is_numeric()).then_some(loc)
        })
    });
    let explicit = (0..n).find_map(|j| {
        let func = aggregate_word(&ctx.tok(j).lemma)?;
        let target = (j + 1..n).find(|&k| !ctx.skippable(ctx.tok(k)))?;
        let loc = ctx.resolve(target, tables)?;
        (func == AggFunc::Count || ctx.dtype(loc).is_numeric()).then_some((func, loc))
    });
    let threshold = bound.literals.iter().position(|l| {
        l.by == BoundBy::Cue
            && matches!(
                l.op,
                CompareOp::Gt | CompareOp::Lt | CompareOp::Ge | CompareOp::Le
            )
            && ctx.dtype((l.table_index, l.column_index)).is_numeric()
    });
    match (explicit, threshold) {
        (Some((func, measure)), threshold) => Some(AggregatePlan {
            func,
            measure,
            group,
            threshold: threshold.filter(|&k| {
                let l = &bound.literals[k];
                (l.table_index, l.column_index) == measure && group.is_some()
            }),
        }),
        (None, Some(k)) if group.is_some() => {
            let l = &bound.literals[k];
            Some(AggregatePlan {
                func: AggFunc::Sum,
                measure: (l.table_index, l.column_index),
                group,
                threshold: Some(k),
            })
        }
        _ => None,
    }
}

fn classify_plan(plan: &Plan) -> QueryClass {
    if plan.division.is_some() {
        QueryClass::Division
    } else if plan.aggregate.is_some() {
        QueryClass::Aggregate
    } else if plan.bound.tables.len() > 1 {
        QueryClass::Join
    } else if !plan.bound.literals.is_empty() {
        QueryClass::Selection
    } else if !plan.projection.is_empty() {
        QueryClass::Projection
    } else {
        QueryClass::Wildcard
    }
}

/// Decides the query class. Binding failures classify as selection; the
/// error resurfaces from `build_ast`.
pub fn classify(
    q: &TaggedQuery,
    m: &MatchResult,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> QueryClass {
    let ctx = Ctx {
        q,
        m,
        catalog,
        tau: config.tau,
    };
    match plan(&ctx) {
        Ok(p) => classify_plan(&p),
        Err(_) => QueryClass::Selection,
    }
}

/// Binds every literal of the query to a column and comparator.
pub fn bind_literals(
    q: &TaggedQuery,
    m: &MatchResult,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Result<Vec<BoundLiteral>, GenerateError> {
    let ctx = Ctx {
        q,
        m,
        catalog,
        tau: config.tau,
    };
    bind(&ctx).map(|b| b.literals)
}

/// Builds the AST for the given class.
pub fn build_ast(
    q: &TaggedQuery,
    m: &MatchResult,
    class: QueryClass,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Result<Query, GenerateError> {
    let ctx = Ctx {
        q,
        m,
        catalog,
        tau: config.tau,
    };
    let plan = plan(&ctx)?;
    Ok(build(&ctx, &plan, class))
}

/// classify and build_ast in one pass.
pub fn generate(
    q: &TaggedQuery,
    m: &MatchResult,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Result<(QueryClass, Query, Vec<BoundLiteral>), GenerateError> {
    let ctx = Ctx {
        q,
        m,
        catalog,
        tau: config.tau,
    };
    let plan = plan(&ctx)?;
    let class = classify_plan(&plan);
    let ast = build(&ctx, &plan, class);
    Ok((class, ast, plan.bound.literals))
}

fn col(ctx: &Ctx, loc: Loc) -> ColumnRef {
    ColumnRef::new(ctx.column_name(loc))
}

fn from_tables(ctx: &Ctx, tables: &[usize]) -> Vec<TableRef> {
    tables
        .iter()
        .map(|&t| TableRef::new(ctx.table_name(t)))
        .collect()
}

/// Equalities first, then the rest; within each group by table order in
/// FROM, then column declaration order.
fn predicates<'b>(
    ctx: &Ctx,
    tables: &[usize],
    lits: impl Iterator<Item = &'b BoundLiteral>,
) -> Vec<Predicate> {
    let mut lits: Vec<&BoundLiteral> = lits.collect();
    let table_rank = |t: usize| tables.iter().position(|&x| x == t).unwrap_or(usize::MAX);
    lits.sort_by_key(|l| {
        (
            l.op != CompareOp::Eq,
            table_rank(l.table_index),
            l.column_index,
        )
    });
    lits.into_iter()
        .map(|l| {
            Predicate::compare(
                col(ctx, (l.table_index, l.column_index)),
                l.op,
                l.value.clone(),
            )
        })
        .collect()
}

fn build(ctx: &Ctx, plan: &Plan, class: QueryClass) -> Query {
    let tables = &plan.bound.tables;
    match (class, &plan.division, &plan.aggregate) {
        (QueryClass::Division, Some(d), _) => build_division(ctx, plan, d),
        (QueryClass::Aggregate, _, Some(a)) => build_aggregate(ctx, plan, a),
        _ => {
            let projection = if plan.projection.is_empty() {
                Projection::Wildcard
            } else {
                Projection::Items(
                    plan.projection
                        .iter()
                        .map(|&l| SelectItem::Column(col(ctx, l)))
                        .collect(),
                )
            };
            let mut s = Select::new(projection, from_tables(ctx, tables));
            s.selection = predicates(ctx, tables, plan.bound.literals.iter());
            Query::select(s)
        }
    }
}

fn build_division(ctx: &Ctx, plan: &Plan, d: &Division) -> Query {
    let entity = &plan.bound.literals[d.entity];
    let table = ctx.table_name(d.set.0);
    let alias = "t";
    let project = col(ctx, d.project);
    let subset = |filter: Operand, by: ColumnRef| {
        let mut s = Select::new(
            Projection::Items(vec![SelectItem::Column(col(ctx, d.set))]),
            vec![TableRef::new(table)],
        );
        s.selection.push(Predicate::Compare {
            left: Operand::Column(by),
            op: CompareOp::Eq,
            right: filter,
        });
        Query::select(s)
    };
    let container = subset(
        Operand::Column(ColumnRef::qualified(alias, project.name.clone())),
        project.clone(),
    );
    let contained = subset(
        Operand::Literal(entity.value.clone()),
        col(ctx, (entity.table_index, entity.column_index)),
    );
    let mut outer = Select::new(
        Projection::Items(vec![SelectItem::Column(project)]),
        vec![TableRef::aliased(table, alias)],
    );
    outer.selection.push(Predicate::Contains {
        container: Box::new(container),
        contained: Box::new(contained),
    });
    Query::select(outer)
}

fn build_aggregate(ctx: &Ctx, plan: &Plan, a: &AggregatePlan) -> Query {
    let mut tables = plan.bound.tables.clone();
    for loc in [Some(a.measure), a.group].into_iter().flatten() {
        if !tables.contains(&loc.0) {
            tables.push(loc.0);
        }
    }
    tables.sort_unstable();
    let agg = Aggregate {
        func: a.func,
        arg: Some(col(ctx, a.measure)),
    };
    let mut items = Vec::new();
    if let Some(g) = a.group {
        items.push(SelectItem::Column(col(ctx, g)));
    }
    items.push(SelectItem::Aggregate(agg.clone()));
    let mut s = Select::new(Projection::Items(items), from_tables(ctx, &tables));
    s.selection = predicates(
        ctx,
        &tables,
        plan.bound
            .literals
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != a.threshold)
            .map(|(_, l)| l),
    );
    s.group_by = a.group.map(|g| col(ctx, g));
    s.having = a.threshold.map(|k| {
        let l = &plan.bound.literals[k];
        Having {
            aggregate: agg.clone(),
            op: l.op,
            value: l.value.clone(),
        }
    });
    Query::select(s)
}
