use std::fmt;

use serde::Serialize;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Query {
    Select(Box<Select>),
    /// Set difference of two queries.
    Except(Box<Query>, Box<Query>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Select {
    pub projection: Projection,
    /// Tables combined left to right by natural join.
    pub from: Vec<TableRef>,
    /// Conjunction of predicates; empty means no WHERE clause.
    pub selection: Vec<Predicate>,
    pub group_by: Option<ColumnRef>,
    pub having: Option<Having>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Wildcard,
    Items(Vec<SelectItem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRef {
    pub name: String,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectItem {
    Column(ColumnRef),
    Aggregate(Aggregate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggFunc {
    Sum,
    Avg,
    Min,
    Max,
    Count,
}

/// `arg = None` is `COUNT(*)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Aggregate {
    pub func: AggFunc,
    pub arg: Option<ColumnRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Literal(Value),
    Column(ColumnRef),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Compare {
        left: Operand,
        op: CompareOp,
        right: Operand,
    },
    /// Every row of `contained` also appears in `container`.
    Contains {
        container: Box<Query>,
        contained: Box<Query>,
    },
    Exists {
        subquery: Box<Query>,
        negated: bool,
    },
    InSubquery {
        column: ColumnRef,
        subquery: Box<Query>,
        negated: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Having {
    pub aggregate: Aggregate,
    pub op: CompareOp,
    pub value: Value,
}

impl ColumnRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            qualifier: None,
            name: name.into(),
        }
    }

    pub fn qualified(qualifier: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            qualifier: Some(qualifier.into()),
            name: name.into(),
        }
    }
}

impl TableRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            alias: None,
        }
    }

    pub fn aliased(name: impl Into<String>, alias: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            alias: Some(alias.into()),
        }
    }
}

impl Select {
    pub fn new(projection: Projection, from: Vec<TableRef>) -> Self {
        Self {
            projection,
            from,
            selection: Vec::new(),
            group_by: None,
            having: None,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.selection.is_empty() && self.group_by.is_none() && self.having.is_none()
    }
}

impl Query {
    pub fn select(s: Select) -> Self {
        Query::Select(Box::new(s))
    }

    pub fn as_select(&self) -> Option<&Select> {
        match self {
            Query::Select(s) => Some(s),
            Query::Except(..) => None,
        }
    }

    pub fn has_contains(&self) -> bool {
        match self {
            Query::Select(s) => s.selection.iter().any(|p| match p {
                Predicate::Contains { .. } => true,
                Predicate::Exists { subquery, .. } | Predicate::InSubquery { subquery, .. } => {
                    subquery.has_contains()
                }
                Predicate::Compare { .. } => false,
            }),
            Query::Except(a, b) => a.has_contains() || b.has_contains(),
        }
    }
}

impl Predicate {
    pub fn compare(column: ColumnRef, op: CompareOp, value: Value) -> Self {
        Predicate::Compare {
            left: Operand::Column(column),
            op,
            right: Operand::Literal(value),
        }
    }
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flipped(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            other => other,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Gt => ord == Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

impl AggFunc {
    pub fn keyword(self) -> &'static str {
        match self {
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
            AggFunc::Count => "COUNT",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word.to_ascii_uppercase().as_str() {
            "SUM" => Some(AggFunc::Sum),
            "AVG" => Some(AggFunc::Avg),
            "MIN" => Some(AggFunc::Min),
            "MAX" => Some(AggFunc::Max),
            "COUNT" => Some(AggFunc::Count),
            _ => None,
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(c) => write!(f, "{}({c})", self.func.keyword()),
            None => write!(f, "{}(*)", self.func.keyword()),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Literal(v) => f.write_str(&v.to_sql()),
            Operand::Column(c) => write!(f, "{c}"),
        }
    }
}
