use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::Value;

/// A possibly qualified column reference as written in the query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnName {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    pub name: String,
}

impl ColumnName {
    pub fn bare(name: impl Into<String>) -> Self {
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

impl fmt::Display for ColumnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
}

impl AggregateFn {
    pub fn sql(self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    Star,
    Column { column: ColumnName },
    /// `arg == None` is `COUNT(*)`.
    Aggregate {
        func: AggregateFn,
        arg: Option<ColumnName>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectItem {
    pub item: Projection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
}

impl SelectItem {
    pub fn star() -> Self {
        Self {
            item: Projection::Star,
            alias: None,
        }
    }

    pub fn column(c: ColumnName) -> Self {
        Self {
            item: Projection::Column { column: c },
            alias: None,
        }
    }

    pub fn aggregate(func: AggregateFn, arg: Option<ColumnName>) -> Self {
        Self {
            item: Projection::Aggregate { func, arg },
            alias: None,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self.item, Projection::Aggregate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableRef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
}

impl TableRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            alias: None,
        }
    }

    /// The name columns use to qualify against this reference.
    pub fn binding(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.name)
    }
}

/// Inner equi-join condition `left = right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JoinPredicate {
    pub left: ColumnName,
    pub right: ColumnName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn sql(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    /// The operator with operands swapped (`5 < a` becomes `a > 5`).
    pub fn flipped(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            other => other,
        }
    }

    pub fn is_range(self) -> bool {
        matches!(self, CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge)
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Atom {
    Compare {
        column: ColumnName,
        op: CompareOp,
        value: Value,
    },
    Between {
        column: ColumnName,
        low: Value,
        high: Value,
    },
    InList {
        column: ColumnName,
        values: Vec<Value>,
    },
    InSubquery {
        column: ColumnName,
        subquery: Box<QueryAst>,
    },
}

impl Atom {
    pub fn column(&self) -> &ColumnName {
        match self {
            Atom::Compare { column, .. }
            | Atom::Between { column, .. }
            | Atom::InList { column, .. }
            | Atom::InSubquery { column, .. } => column,
        }
    }

    pub fn column_mut(&mut self) -> &mut ColumnName {
        match self {
            Atom::Compare { column, .. }
            | Atom::Between { column, .. }
            | Atom::InList { column, .. }
            | Atom::InSubquery { column, .. } => column,
        }
    }
}

/// Boolean tree over atoms. `And`/`Or` are n-ary and kept flat: a node never
/// has a direct child of the same kind and always has at least two children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateExpr {
    Atom(Atom),
    And(Vec<PredicateExpr>),
    Or(Vec<PredicateExpr>),
}

impl PredicateExpr {
    /// Flattening conjunction; returns `None` for an empty list.
    pub fn and(children: Vec<PredicateExpr>) -> Option<PredicateExpr> {
        Self::combine(children, true)
    }

    pub fn or(children: Vec<PredicateExpr>) -> Option<PredicateExpr> {
        Self::combine(children, false)
    }

    fn combine(children: Vec<PredicateExpr>, is_and: bool) -> Option<PredicateExpr> {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match (c, is_and) {
                (PredicateExpr::And(inner), true) | (PredicateExpr::Or(inner), false) => {
                    flat.extend(inner)
                }
                (other, _) => flat.push(other),
            }
        }
        match flat.len() {
            0 => None,
            1 => flat.pop(),
            _ if is_and => Some(PredicateExpr::And(flat)),
            _ => Some(PredicateExpr::Or(flat)),
        }
    }

    /// Top-level conjuncts (the node itself unless it is an `And`).
    pub fn conjuncts(&self) -> Vec<&PredicateExpr> {
        match self {
            PredicateExpr::And(c) => c.iter().collect(),
            other => vec![other],
        }
    }

    pub fn into_conjuncts(self) -> Vec<PredicateExpr> {
        match self {
            PredicateExpr::And(c) => c,
            other => vec![other],
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            PredicateExpr::Atom(a) => f(a),
            PredicateExpr::And(c) | PredicateExpr::Or(c) => c.iter().for_each(|x| x.visit_atoms(f)),
        }
    }

    pub fn visit_atoms_mut(&mut self, f: &mut impl FnMut(&mut Atom)) {
        match self {
            PredicateExpr::Atom(a) => f(a),
            PredicateExpr::And(c) | PredicateExpr::Or(c) => {
                c.iter_mut().for_each(|x| x.visit_atoms_mut(f))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAst {
    pub projections: Vec<SelectItem>,
    pub from_tables: Vec<TableRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub join_predicates: Vec<JoinPredicate>,
    #[serde(default, rename = "where", skip_serializing_if = "Option::is_none")]
    pub where_clause: Option<PredicateExpr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_by: Vec<ColumnName>,
}

impl QueryAst {
    /// `SELECT * FROM <table>`.
    pub fn scan(table: impl Into<String>) -> Self {
        Self {
            projections: vec![SelectItem::star()],
            from_tables: vec![TableRef::new(table)],
            join_predicates: Vec::new(),
            where_clause: None,
            group_by: Vec::new(),
        }
    }

    pub fn has_aggregate(&self) -> bool {
        self.projections.iter().any(SelectItem::is_aggregate)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        self.where_clause.as_ref().map(|w| w.atoms()).unwrap_or_default()
    }

    /// Appends a conjunct to the WHERE clause.
    pub fn and_where(&mut self, p: PredicateExpr) {
        let mut parts = self
            .where_clause
            .take()
            .map(PredicateExpr::into_conjuncts)
            .unwrap_or_default();
        parts.push(p);
        self.where_clause = PredicateExpr::and(parts);
    }

    pub fn subqueries(&self) -> Vec<&QueryAst> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::InSubquery { subquery, .. } => Some(subquery.as_ref()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryCategory {
    SimpleSelection,
    ComplexJoin,
    Aggregation,
}

impl QueryCategory {
    pub const ALL: [QueryCategory; 3] = [
        QueryCategory::SimpleSelection,
        QueryCategory::ComplexJoin,
        QueryCategory::Aggregation,
    ];

    /// Aggregation wins over ComplexJoin when both apply.
    pub fn of(q: &QueryAst) -> Self {
        if !q.group_by.is_empty() || q.has_aggregate() {
            QueryCategory::Aggregation
        } else if q.from_tables.len() >= 2 {
            QueryCategory::ComplexJoin
        } else {
            QueryCategory::SimpleSelection
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QueryCategory::SimpleSelection => "simple_selection",
            QueryCategory::ComplexJoin => "complex_join",
            QueryCategory::Aggregation => "aggregation",
        }
    }
}

impl fmt::Display for QueryCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for QueryCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryCategory::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown query category `{s}`"))
    }
}
