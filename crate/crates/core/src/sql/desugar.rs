use super::ast::*;

/// Rewrites every `A CONTAINS B` into `NOT EXISTS (B EXCEPT A)`: no row of
/// B is missing from A. Queries without containment come back unchanged.
pub fn desugar_contains(query: &Query) -> Query {
    match query {
        Query::Select(s) => Query::select(Select {
            selection: s.selection.iter().map(predicate).collect(),
            ..(**s).clone()
        }),
        Query::Except(a, b) => {
            Query::Except(Box::new(desugar_contains(a)), Box::new(desugar_contains(b)))
        }
    }
}

fn predicate(p: &Predicate) -> Predicate {
    match p {
        Predicate::Contains {
            container,
            contained,
        } => Predicate::Exists {
            subquery: Box::new(Query::Except(
                Box::new(desugar_contains(contained)),
                Box::new(desugar_contains(container)),
            )),
            negated: true,
        },
        Predicate::Exists { subquery, negated } => Predicate::Exists {
            subquery: Box::new(desugar_contains(subquery)),
            negated: *negated,
        },
        Predicate::InSubquery {
            column,
            subquery,
            negated,
        } => Predicate::InSubquery {
            column: column.clone(),
            subquery: Box::new(desugar_contains(subquery)),
            negated: *negated,
        },
        other => other.clone(),
    }
}
