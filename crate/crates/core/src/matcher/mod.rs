//! Schema linking: which tables and columns an English query talks about.

mod similarity;
pub mod stable;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{DatabaseCatalog, TableSchema, Vocabulary};
use crate::text::{CompoundLexicon, Tag, TaggedQuery, Token, TokenKind};

pub use similarity::{
    edit_distance, edit_distance_adjusted, homo_sim, lambda_sim, name_similarity, normalize_name,
    psi_sim, sigma, soundex, SimilarityBreakdown, SimilarityError,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Relative margin: a candidate survives when it scores at least
    /// `(1 - delta)` of the best competitor.
    pub delta: f64,
    /// Absolute floor for any term/name pairing.
    pub tau: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            delta: 0.2,
            tau: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("tau must lie in (0, 1], got {0}")]
    Tau(f64),
    #[error("delta must lie in [0, 1), got {0}")]
    Delta(f64),
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(ConfigError::Tau(self.tau));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Delta(self.delta));
        }
        Ok(())
    }
}

/// A query term: one token of the analyzed query, possibly a compound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub position: usize,
    pub text: String,
    pub lemma: String,
    pub tag: Tag,
    pub literal: bool,
    pub command: bool,
}

impl Term {
    pub fn from_token(t: &Token) -> Self {
        Self {
            position: t.position,
            text: t.phrase.clone(),
            lemma: t.lemma.clone(),
            tag: t.tag,
            literal: t.literal_value().is_some(),
            command: t.is_command(),
        }
    }

    /// What gets compared against schema names.
    pub fn key(&self) -> &str {
        &self.lemma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCandidate {
    pub term: String,
    pub position: usize,
    pub table: String,
    pub sigma: f64,
}

/// One term assigned to one column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Binding {
    pub term: String,
    pub position: usize,
    pub table: String,
    pub column: String,
    #[serde(skip)]
    pub table_index: usize,
    #[serde(skip)]
    pub column_index: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableScore {
    pub table: String,
    pub term: String,
    pub position: usize,
    pub sigma: f64,
    pub mu: Vec<Binding>,
    pub unmatched: Vec<String>,
    pub penalty: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectedBy {
    /// Ranked by Ψ over the table candidates.
    Score,
    /// Added afterwards to bind attribute terms no selected table could.
    Coverage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedTable {
    pub table: String,
    pub table_index: usize,
    /// Attribute terms bound to this table's columns (B).
    pub bindings: Vec<Binding>,
    pub psi: Option<f64>,
    pub by: SelectedBy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub t_n: Vec<Term>,
    pub t_p: Vec<Term>,
    pub t_c: Vec<Term>,
    pub t_d: Vec<String>,
    pub l_t: Vec<TableCandidate>,
    pub scores: Vec<TableScore>,
    /// Selected tables in catalog order.
    pub f_t: Vec<SelectedTable>,
}

impl MatchResult {
    pub fn binding_at(&self, position: usize) -> Option<&Binding> {
        self.f_t
            .iter()
            .flat_map(|s| &s.bindings)
            .find(|b| b.position == position)
    }

    pub fn bindings(&self) -> impl Iterator<Item = &Binding> {
        self.f_t.iter().flat_map(|s| &s.bindings)
    }

    pub fn table_indices(&self) -> Vec<usize> {
        self.f_t.iter().map(|s| s.table_index).collect()
    }

    /// Whether `position` is the term that selected some table.
    pub fn is_table_term(&self, position: usize) -> bool {
        self.t_c.iter().any(|t| t.position == position)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("no table in the database matches the query")]
    NoTableMatch,
}

impl CompoundLexicon for DatabaseCatalog {
    fn is_known_value(&self, phrase: &str) -> bool {
        DatabaseCatalog::is_known_value(self, phrase)
    }

    fn joins_column(&self, first: &str, second: &str) -> bool {
        let joined = format!("{first}{second}");
        self.schemas()
            .flat_map(|s| &s.columns)
            .any(|c| normalize_name(&c.name) == joined)
    }
}

fn best_column_sigma(term: &Term, schema: &TableSchema, vocabulary: &Vocabulary) -> f64 {
    schema
        .columns
        .iter()
        .map(|c| name_similarity(term.key(), &c.name, vocabulary))
        .fold(0.0, f64::max)
}

/// T_p is every non-stop content term or literal; T_n keeps the nouns,
/// verbs and entities, dropping database commands that match no schema name.
pub fn candidate_terms(
    q: &TaggedQuery,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> (Vec<Term>, Vec<Term>) {
    let t_p: Vec<Term> = q
        .tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Punctuation)
        .filter(|t| !matches!(t.tag, Tag::Stop | Tag::Preposition | Tag::Other))
        .map(Term::from_token)
        .collect();
    let vocabulary = catalog.vocabulary();
    let t_n = q
        .tokens
        .iter()
        .filter(|t| match t.kind {
            TokenKind::Word => matches!(t.tag, Tag::Noun | Tag::Verb | Tag::Literal),
            TokenKind::QuotedLiteral => true,
            _ => false,
        })
        .map(Term::from_token)
        .filter(|term| {
            !term.command
                || catalog.schemas().any(|s| {
                    name_similarity(term.key(), &s.name, vocabulary) >= config.tau
                        || best_column_sigma(term, s, vocabulary) >= config.tau
                })
        })
        .collect();
    (t_n, t_p)
}

/// L_t: each term keeps the tables it matches above the floor and within
/// the margin of its own best table. Returns (L_t, T_c, T_d).
pub fn score_tables(
    t_n: &[Term],
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> (Vec<TableCandidate>, Vec<Term>, Vec<String>) {
    let vocabulary = catalog.vocabulary();
    let mut l_t = Vec::new();
    let mut t_c = Vec::new();
    let mut t_d: Vec<String> = Vec::new();
    for term in t_n {
        let scored: Vec<(&TableSchema, f64)> = catalog
            .schemas()
            .map(|s| (s, name_similarity(term.key(), &s.name, vocabulary)))
            .collect();
        let best = scored.iter().map(|p| p.1).fold(0.0, f64::max);
        let kept: Vec<_> = scored
            .into_iter()
            .filter(|&(_, s)| s >= config.tau && s >= (1.0 - config.delta) * best)
            .collect();
        if kept.is_empty() {
            continue;
        }
        t_c.push(term.clone());
        for (schema, s) in kept {
            if !t_d.contains(&schema.name) {
                t_d.push(schema.name.clone());
            }
            l_t.push(TableCandidate {
                term: term.text.clone(),
                position: term.position,
                table: schema.name.clone(),
                sigma: s,
            });
        }
    }
    (l_t, t_c, t_d)
}

/// One-to-one term→column assignment by deferred acceptance. Returns μ and
/// the unassigned terms A.
pub fn stable_match(
    terms: &[Term],
    schema: &TableSchema,
    table_index: usize,
    vocabulary: &Vocabulary,
    tau: f64,
) -> (Vec<Binding>, Vec<Term>) {
    let scores: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| {
            schema
                .columns
                .iter()
                .map(|c| name_similarity(t.key(), &c.name, vocabulary))
                .collect()
        })
        .collect();
    let assigned = stable::deferred_acceptance(&scores, tau);
    let mut mu = Vec::new();
    let mut unmatched = Vec::new();
    for (k, (term, col)) in terms.iter().zip(assigned).enumerate() {
        match col {
            Some(c) => mu.push(Binding {
                term: term.text.clone(),
                position: term.position,
                table: schema.name.clone(),
                column: schema.columns[c].name.clone(),
                table_index,
                column_index: c,
                sigma: scores[k][c],
            }),
            None => unmatched.push(term.clone()),
        }
    }
    (mu, unmatched)
}

/// π(A) = |A| / max(1, |T_p| - 1).
pub fn penalty(unmatched: usize, t_p: usize) -> f64 {
    unmatched as f64 / (t_p.saturating_sub(1).max(1)) as f64
}

/// T_p minus the table term itself, literals, commands and terms that are
/// better read as naming table `schema` than one of its columns.
pub fn attribute_candidates(
    t_p: &[Term],
    exclude: Option<usize>,
    schema: Option<&TableSchema>,
    vocabulary: &Vocabulary,
    tau: f64,
) -> Vec<Term> {
    t_p.iter()
        .filter(|t| Some(t.position) != exclude)
        .filter(|t| !t.literal && !t.command)
        .filter(|t| matches!(t.tag, Tag::Noun | Tag::Verb | Tag::Adjective))
        .filter(|t| match schema {
            Some(s) => {
                let as_table = name_similarity(t.key(), &s.name, vocabulary);
                !(as_table >= tau && as_table >= best_column_sigma(t, s, vocabulary))
            }
            None => true,
        })
        .cloned()
        .collect()
}

/// Ψ(a, r) = σ(a, r) + Σ μ − π(A).
pub fn table_score(
    candidate: &TableCandidate,
    t_p: &[Term],
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Option<TableScore> {
    let table_index = catalog.table_index(&candidate.table)?;
    let schema = &catalog.relations()[table_index].schema;
    let vocabulary = catalog.vocabulary();
    let terms = attribute_candidates(
        t_p,
        Some(candidate.position),
        Some(schema),
        vocabulary,
        config.tau,
    );
    let (mu, unmatched) = stable_match(&terms, schema, table_index, vocabulary, config.tau);
    let pi = penalty(unmatched.len(), t_p.len());
    let psi = candidate.sigma + mu.iter().map(|b| b.sigma).sum::<f64>() - pi;
    Some(TableScore {
        table: schema.name.clone(),
        term: candidate.term.clone(),
        position: candidate.position,
        sigma: candidate.sigma,
        mu,
        unmatched: unmatched.into_iter().map(|t| t.text).collect(),
        penalty: pi,
        psi,
    })
}

/// F_t from the Ψ scores: the best entry per table, ranked. A lower-ranked
/// table stays if it is within the margin of the best, binds an attribute
/// term no higher table bound, or was named by a term of its own.
pub fn select_tables(
    scores: &[TableScore],
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Vec<SelectedTable> {
    let mut best: Vec<&TableScore> = Vec::new();
    for s in scores {
        match best.iter_mut().find(|b| b.table == s.table) {
            Some(b) if s.psi > b.psi => *b = s,
            Some(_) => {}
            None => best.push(s),
        }
    }
    let order = |name: &str| catalog.table_index(name).unwrap_or(usize::MAX);
    best.sort_by(|a, b| {
        b.psi
            .total_cmp(&a.psi)
            .then(order(&a.table).cmp(&order(&b.table)))
    });
    let Some(top) = best.first() else {
        return Vec::new();
    };
    let psi_max = top.psi;
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for (rank, s) in best.iter().enumerate() {
        let fresh: Vec<Binding> =
            s.mu.iter()
                .filter(|b| !bound.contains(&b.position) && !used.contains(&b.position))
                .cloned()
                .collect();
        let distinct = !used.contains(&s.position) && !bound.contains(&s.position);
        let keep =
            rank == 0 || s.psi >= (1.0 - config.delta) * psi_max || !fresh.is_empty() || distinct;
        if !keep {
            continue;
        }
        used.insert(s.position);
        bound.extend(fresh.iter().map(|b| b.position));
        out.push(SelectedTable {
            table: s.table.clone(),
            table_index: order(&s.table),
            bindings: fresh,
            psi: Some(s.psi),
            by: SelectedBy::Score,
        });
    }
    out
}

/// Adds tables that bind attribute terms still unbound, best first.
fn cover_remaining(
    selected: &mut Vec<SelectedTable>,
    t_p: &[Term],
    t_c: &[Term],
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) {
    let vocabulary = catalog.vocabulary();
    loop {
        let bound: BTreeSet<usize> = selected
            .iter()
            .flat_map(|s| s.bindings.iter().map(|b| b.position))
            .chain(t_c.iter().map(|t| t.position))
            .collect();
        let open: Vec<Term> = attribute_candidates(t_p, None, None, vocabulary, config.tau)
            .into_iter()
            .filter(|t| !bound.contains(&t.position))
            .collect();
        if open.is_empty() {
            return;
        }
        let mut pick: Option<(usize, Vec<Binding>)> = None;
        for (index, rel) in catalog.relations().iter().enumerate() {
            if selected.iter().any(|s| s.table_index == index) {
                continue;
            }
            let (mu, _) = stable_match(&open, &rel.schema, index, vocabulary, config.tau);
            if mu.is_empty() {
                continue;
            }
            let better = match &pick {
                None => true,
                Some((_, cur)) => {
                    let total = |m: &[Binding]| m.iter().map(|b| b.sigma).sum::<f64>();
                    mu.len() > cur.len() || (mu.len() == cur.len() && total(&mu) > total(cur))
                }
            };
            if better {
                pick = Some((index, mu));
            }
        }
        let Some((index, bindings)) = pick else {
            return;
        };
        selected.push(SelectedTable {
            table: catalog.relations()[index].name().to_string(),
            table_index: index,
            bindings,
            psi: None,
            by: SelectedBy::Coverage,
        });
    }
}

/// Runs the whole linking procedure over an analyzed query.
pub fn match_query(
    q: &TaggedQuery,
    catalog: &DatabaseCatalog,
    config: &MatchConfig,
) -> Result<MatchResult, MatchError> {
    let (t_n, t_p) = candidate_terms(q, catalog, config);
    let (l_t, t_c, t_d) = score_tables(&t_n, catalog, config);
    let scores: Vec<TableScore> = l_t
        .iter()
        .filter_map(|c| table_score(c, &t_p, catalog, config))
        .collect();
    let mut f_t = select_tables(&scores, catalog, config);
    cover_remaining(&mut f_t, &t_p, &t_c, catalog, config);
    if f_t.is_empty() {
        return Err(MatchError::NoTableMatch);
    }
    f_t.sort_by_key(|s| s.table_index);
    Ok(MatchResult {
        t_n,
        t_p,
        t_c,
        t_d,
        l_t,
        scores,
        f_t,
    })
}
