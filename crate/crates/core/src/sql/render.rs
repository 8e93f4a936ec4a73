use super::ast::*;
use super::parser::is_reserved;

/// Identifiers that would not lex back as plain names are double-quoted.
fn ident(name: &str) -> String {
    let mut chars = name.chars();
    let plain = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(name);
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

fn column(c: &ColumnRef) -> String {
    match &c.qualifier {
        Some(q) => format!("{}.{}", ident(q), ident(&c.name)),
        None => ident(&c.name),
    }
}

fn aggregate(a: &Aggregate) -> String {
    match &a.arg {
        Some(c) => format!("{}({})", a.func.keyword(), column(c)),
        None => format!("{}(*)", a.func.keyword()),
    }
}

fn operand(o: &Operand) -> String {
    match o {
        Operand::Literal(v) => v.to_sql(),
        Operand::Column(c) => column(c),
    }
}

/// Lines under construction. `append` glues the first line of a fragment
/// onto the current last line, which is how subqueries open on the line
/// that mentions them.
#[derive(Default)]
struct Lines(Vec<String>);

impl Lines {
    fn line(s: impl Into<String>) -> Self {
        Lines(vec![s.into()])
    }

    fn push_str(&mut self, s: &str) {
        match self.0.last_mut() {
            Some(last) => last.push_str(s),
            None => self.0.push(s.to_string()),
        }
    }

    fn append(&mut self, other: Lines) {
        let mut it = other.0.into_iter();
        if let Some(first) = it.next() {
            self.push_str(&first);
        }
        self.0.extend(it);
    }
}

/// Canonical text: uppercase keywords, one clause per line, subqueries
/// indented by two spaces, trailing semicolon. A block with nothing but
/// SELECT and FROM stays on one line.
pub fn render_sql(query: &Query) -> String {
    let mut out = query_lines(query).0.join("\n");
    out.push(';');
    out
}

/// Single-line form without the semicolon, for diagnostics.
pub fn render_inline(query: &Query) -> String {
    query_lines(query)
        .0
        .iter()
        .map(|l| l.trim())
        .collect::<Vec<_>>()
        .join(" ")
        .replace("( ", "(")
        .replace(" )", ")")
}

fn query_lines(query: &Query) -> Lines {
    match query {
        Query::Select(s) => select_lines(s),
        Query::Except(a, b) => {
            let mut out = operand_lines(a, false);
            out.0.push("EXCEPT".to_string());
            out.0.extend(operand_lines(b, true).0);
            out
        }
    }
}

fn operand_lines(q: &Query, right: bool) -> Lines {
    match q {
        Query::Except(..) if right => subquery(q),
        _ => query_lines(q),
    }
}

fn select_lines(s: &Select) -> Lines {
    let head = format!("SELECT {}", projection(&s.projection));
    let from = format!("FROM {}", from_clause(&s.from));
    if s.is_simple() {
        return Lines::line(format!("{head} {from}"));
    }
    let mut out = Lines(vec![head, from]);
    if !s.selection.is_empty() {
        out.0.push("WHERE ".to_string());
        for (k, p) in s.selection.iter().enumerate() {
            if k > 0 {
                out.push_str(" AND ");
            }
            out.append(predicate(p));
        }
    }
    if let Some(g) = &s.group_by {
        out.0.push(format!("GROUP BY {}", column(g)));
    }
    if let Some(h) = &s.having {
        out.0.push(format!(
            "HAVING {} {} {}",
            aggregate(&h.aggregate),
            h.op.symbol(),
            h.value.to_sql()
        ));
    }
    out
}

fn projection(p: &Projection) -> String {
    match p {
        Projection::Wildcard => "*".to_string(),
        Projection::Items(items) => items
            .iter()
            .map(|i| match i {
                SelectItem::Column(c) => column(c),
                SelectItem::Aggregate(a) => aggregate(a),
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn from_clause(from: &[TableRef]) -> String {
    from.iter()
        .map(|t| match &t.alias {
            Some(a) => format!("{} AS {}", ident(&t.name), ident(a)),
            None => ident(&t.name),
        })
        .collect::<Vec<_>>()
        .join(" NATURAL JOIN ")
}

fn subquery(q: &Query) -> Lines {
    let inner = query_lines(q);
    if inner.0.len() == 1 {
        return Lines::line(format!("({})", inner.0[0]));
    }
    let mut out = Lines::line("(");
    out.0.extend(inner.0.into_iter().map(|l| format!("  {l}")));
    out.0.push(")".to_string());
    out
}

fn predicate(p: &Predicate) -> Lines {
    match p {
        Predicate::Compare { left, op, right } => Lines::line(format!(
            "{} {} {}",
            operand(left),
            op.symbol(),
            operand(right)
        )),
        Predicate::Contains {
            container,
            contained,
        } => {
            let mut out = subquery(container);
            out.push_str(" CONTAINS ");
            out.append(subquery(contained));
            out
        }
        Predicate::Exists {
            subquery: q,
            negated,
        } => {
            let mut out = Lines::line(if *negated { "NOT EXISTS " } else { "EXISTS " });
            out.append(subquery(q));
            out
        }
        Predicate::InSubquery {
            column: col,
            subquery: q,
            negated,
        } => {
            let keyword = if *negated { "NOT IN " } else { "IN " };
            let mut out = Lines::line(format!("{} {keyword}", column(col)));
            out.append(subquery(q));
            out
        }
    }
}
