use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::*;
use crate::value::Value;

const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "AND", "OR", "GROUP", "BY", "HAVING", "NATURAL", "JOIN", "AS",
    "CONTAINS", "EXISTS", "NOT", "IN", "EXCEPT", "NULL",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("syntax error at line {line}, column {column}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident { text: String, quoted: bool },
    Number(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident {
                text,
                quoted: false,
            } => f.write_str(text),
            Tok::Ident { text, quoted: true } => write!(f, "\"{text}\""),
            Tok::Number(n) => f.write_str(n),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::Sym(s) => f.write_str(s),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            Tok::Ident {
                text: chars[start..i].iter().collect(),
                quoted: false,
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c == '\'' || c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => {
                        return Err(SyntaxError {
                            line: l0,
                            column: c0,
                            found: "unterminated quote".into(),
                            expected: vec![format!("closing {c}")],
                        })
                    }
                    Some(&d) if d == c => {
                        advance(&mut i, &mut line, &mut col, d);
                        if chars.get(i) == Some(&c) {
                            s.push(c);
                            advance(&mut i, &mut line, &mut col, c);
                        } else {
                            break;
                        }
                    }
                    Some(&d) => {
                        s.push(d);
                        advance(&mut i, &mut line, &mut col, d);
                    }
                }
            }
            if c == '\'' {
                Tok::Str(s)
            } else {
                Tok::Ident {
                    text: s,
                    quoted: true,
                }
            }
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym: Option<(&'static str, usize)> = match two.as_str() {
                "<=" => Some(("<=", 2)),
                ">=" => Some((">=", 2)),
                "<>" | "!=" => Some(("<>", 2)),
                _ => match c {
                    '≤' => Some(("<=", 1)),
                    '≥' => Some((">=", 1)),
                    '≠' => Some(("<>", 1)),
                    '=' => Some(("=", 1)),
                    '<' => Some(("<", 1)),
                    '>' => Some((">", 1)),
                    '(' => Some(("(", 1)),
                    ')' => Some((")", 1)),
                    ',' => Some((",", 1)),
                    '.' => Some((".", 1)),
                    '*' => Some(("*", 1)),
                    ';' => Some((";", 1)),
                    '-' => Some(("-", 1)),
                    _ => None,
                },
            };
            let Some((sym, len)) = sym else {
                return Err(SyntaxError {
                    line: l0,
                    column: c0,
                    found: c.to_string(),
                    expected: vec!["a SQL token".into()],
                });
            };
            for _ in 0..len {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            Tok::Sym(sym)
        };
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError {
            line: s.line,
            column: s.column,
            found: s.tok.to_string(),
            expected: expected.iter().map(|e| e.to_string()).collect(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.is_kw_at(0, kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident { text, quoted: false } if text.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&[s]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident { text, quoted } if quoted || !is_reserved(&text) => {
                self.bump();
                Ok(text)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn query(&mut self) -> PResult<Query> {
        let mut q = self.query_primary()?;
        while self.eat_kw("EXCEPT") {
            let right = self.query_primary()?;
            q = Query::Except(Box::new(q), Box::new(right));
        }
        Ok(q)
    }

    fn query_primary(&mut self) -> PResult<Query> {
        if self.eat_sym("(") {
            let q = self.query()?;
            self.expect_sym(")")?;
            return Ok(q);
        }
        if self.is_kw("SELECT") {
            return Ok(Query::select(self.select()?));
        }
        Err(self.error(&["SELECT", "("]))
    }

    fn select(&mut self) -> PResult<Select> {
        self.expect_kw("SELECT")?;
        let projection = if self.eat_sym("*") {
            Projection::Wildcard
        } else {
            let mut items = vec![self.select_item()?];
            while self.eat_sym(",") {
                items.push(self.select_item()?);
            }
            Projection::Items(items)
        };
        self.expect_kw("FROM")?;
        let mut from = vec![self.table_ref()?];
        while self.is_kw("NATURAL") {
            self.bump();
            self.expect_kw("JOIN")?;
            from.push(self.table_ref()?);
        }
        let mut selection = Vec::new();
        if self.eat_kw("WHERE") {
            selection.push(self.predicate()?);
            while self.eat_kw("AND") {
                selection.push(self.predicate()?);
            }
        }
        let group_by = if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            Some(self.column()?)
        } else {
            None
        };
        let having = if self.eat_kw("HAVING") {
            let aggregate = self
                .aggregate()?
                .ok_or_else(|| self.error(&["aggregate function"]))?;
            let op = self
                .compare_op()?
                .ok_or_else(|| self.error(&["comparison operator"]))?;
            let value = self.literal()?.ok_or_else(|| self.error(&["literal"]))?;
            Some(Having {
                aggregate,
                op,
                value,
            })
        } else {
            None
        };
        Ok(Select {
            projection,
            from,
            selection,
            group_by,
            having,
        })
    }

    fn aggregate(&mut self) -> PResult<Option<Aggregate>> {
        let func = match self.peek() {
            Tok::Ident {
                text,
                quoted: false,
            } if matches!(self.peek_at(1), Tok::Sym("(")) => AggFunc::from_keyword(text),
            _ => None,
        };
        let Some(func) = func else {
            return Ok(None);
        };
        self.bump();
        self.expect_sym("(")?;
        let arg = if func == AggFunc::Count && self.eat_sym("*") {
            None
        } else {
            Some(self.column()?)
        };
        self.expect_sym(")")?;
        Ok(Some(Aggregate { func, arg }))
    }

    fn select_item(&mut self) -> PResult<SelectItem> {
        if let Some(a) = self.aggregate()? {
            return Ok(SelectItem::Aggregate(a));
        }
        match self.peek() {
            Tok::Ident { text, quoted } if *quoted || !is_reserved(text) => {
                Ok(SelectItem::Column(self.column()?))
            }
            _ => Err(self.error(&["*", "column", "aggregate function"])),
        }
    }

    fn table_ref(&mut self) -> PResult<TableRef> {
        let name = self.ident("table name")?;
        let alias = if self.eat_kw("AS") {
            Some(self.ident("alias")?)
        } else {
            match self.peek() {
                Tok::Ident { text, quoted } if *quoted || !is_reserved(text) => {
                    Some(self.ident("alias")?)
                }
                _ => None,
            }
        };
        Ok(TableRef { name, alias })
    }

    fn column(&mut self) -> PResult<ColumnRef> {
        let first = self.ident("column")?;
        if self.eat_sym(".") {
            let name = self.ident("column")?;
            Ok(ColumnRef::qualified(first, name))
        } else {
            Ok(ColumnRef::new(first))
        }
    }

    fn compare_op(&mut self) -> PResult<Option<CompareOp>> {
        let op = match self.peek() {
            Tok::Sym("=") => CompareOp::Eq,
            Tok::Sym("<>") => CompareOp::Ne,
            Tok::Sym("<") => CompareOp::Lt,
            Tok::Sym("<=") => CompareOp::Le,
            Tok::Sym(">") => CompareOp::Gt,
            Tok::Sym(">=") => CompareOp::Ge,
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(op))
    }

    fn literal(&mut self) -> PResult<Option<Value>> {
        let negative =
            matches!(self.peek(), Tok::Sym("-")) && matches!(self.peek_at(1), Tok::Number(_));
        if negative {
            self.bump();
        }
        let v = match self.peek().clone() {
            Tok::Number(n) => number(&n, negative),
            Tok::Str(s) => Value::Text(s),
            Tok::Ident {
                text,
                quoted: false,
            } if text.eq_ignore_ascii_case("NULL") => Value::Null,
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(v))
    }

    fn operand(&mut self) -> PResult<Operand> {
        if let Some(v) = self.literal()? {
            return Ok(Operand::Literal(v));
        }
        match self.peek() {
            Tok::Ident { text, quoted } if *quoted || !is_reserved(text) => {
                Ok(Operand::Column(self.column()?))
            }
            _ => Err(self.error(&["column", "literal", "(", "EXISTS", "NOT"])),
        }
    }

    fn subquery(&mut self) -> PResult<Query> {
        self.expect_sym("(")?;
        let q = self.query()?;
        self.expect_sym(")")?;
        Ok(q)
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        if self.is_kw("NOT") && self.is_kw_at(1, "EXISTS") {
            self.bump();
            self.bump();
            return Ok(Predicate::Exists {
                subquery: Box::new(self.subquery()?),
                negated: true,
            });
        }
        if self.eat_kw("EXISTS") {
            return Ok(Predicate::Exists {
                subquery: Box::new(self.subquery()?),
                negated: false,
            });
        }
        if self.is_sym("(") {
            let container = self.subquery()?;
            self.expect_kw("CONTAINS")?;
            let contained = self.subquery()?;
            return Ok(Predicate::Contains {
                container: Box::new(container),
                contained: Box::new(contained),
            });
        }
        let left = self.operand()?;
        if let Some(op) = self.compare_op()? {
            let right = self.operand()?;
            return Ok(Predicate::Compare { left, op, right });
        }
        let negated = self.is_kw("NOT") && self.is_kw_at(1, "IN");
        if negated {
            self.bump();
        }
        if self.eat_kw("IN") {
            let Operand::Column(column) = left else {
                return Err(self.error(&["column before IN"]));
            };
            return Ok(Predicate::InSubquery {
                column,
                subquery: Box::new(self.subquery()?),
                negated,
            });
        }
        Err(self.error(&["=", "<>", "<", "<=", ">", ">=", "IN", "NOT IN"]))
    }
}

fn number(text: &str, negative: bool) -> Value {
    let signed = if negative {
        format!("-{text}")
    } else {
        text.to_string()
    };
    if text.contains('.') {
        return Value::Real(signed.parse().unwrap_or(f64::NAN));
    }
    match signed.parse::<i64>() {
        Ok(i) => Value::Int(i),
        Err(_) => Value::Real(signed.parse().unwrap_or(f64::NAN)),
    }
}

/// Parses one statement of the supported dialect. A trailing semicolon is
/// optional.
pub fn parse_sql(text: &str) -> Result<Query, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let q = p.query()?;
    p.eat_sym(";");
    if !matches!(p.peek(), Tok::Eof) {
        let expected: &[&str] = if q.as_select().is_some_and(|s| s.having.is_none()) {
            &["AND", "GROUP BY", "HAVING", "EXCEPT", ";", "end of input"]
        } else {
            &["EXCEPT", ";", "end of input"]
        };
        return Err(p.error(expected));
    }
    Ok(q)
}
