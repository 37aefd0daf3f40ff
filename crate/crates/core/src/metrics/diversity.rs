use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::schema::SchemaCatalog;
use crate::sql::{canonical_key, skeleton_key, Atom, CompareOp, PredicateExpr, QueryAst, QueryCategory};
use crate::workload::Footprint;

/// Predicate class of a whole query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateClass {
    /// No WHERE conditions beyond join predicates.
    None,
    Equality,
    /// `<`, `<=`, `>`, `>=`, `<>`.
    Range,
    Between,
    InList,
    /// Any IN-subquery, regardless of the other atoms.
    Subquery,
    /// Atoms of more than one class.
    Mixed,
}

impl PredicateClass {
    pub const ALL: [PredicateClass; 7] = [
        PredicateClass::None,
        PredicateClass::Equality,
        PredicateClass::Range,
        PredicateClass::Between,
        PredicateClass::InList,
        PredicateClass::Subquery,
        PredicateClass::Mixed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PredicateClass::None => "none",
            PredicateClass::Equality => "equality",
            PredicateClass::Range => "range",
            PredicateClass::Between => "between",
            PredicateClass::InList => "in_list",
            PredicateClass::Subquery => "subquery",
            PredicateClass::Mixed => "mixed",
        }
    }
}

fn atom_class(a: &Atom) -> PredicateClass {
    match a {
        Atom::Compare { op: CompareOp::Eq, .. } => PredicateClass::Equality,
        Atom::Compare { .. } => PredicateClass::Range,
        Atom::Between { .. } => PredicateClass::Between,
        Atom::InList { .. } => PredicateClass::InList,
        Atom::InSubquery { .. } => PredicateClass::Subquery,
    }
}

pub fn predicate_class(q: &QueryAst) -> PredicateClass {
    let Some(w) = &q.where_clause else {
        return PredicateClass::None;
    };
    let classes: BTreeSet<PredicateClass> = w.atoms().into_iter().map(atom_class).collect();
    if classes.contains(&PredicateClass::Subquery) {
        return PredicateClass::Subquery;
    }
    match classes.len() {
        0 => PredicateClass::None,
        1 => *classes.iter().next().expect("one class"),
        _ => PredicateClass::Mixed,
    }
}

pub(crate) fn class_counts<'a>(corpus: impl IntoIterator<Item = &'a QueryAst>) -> BTreeMap<PredicateClass, usize> {
    let mut out: BTreeMap<PredicateClass, usize> = PredicateClass::ALL.iter().map(|c| (*c, 0)).collect();
    for q in corpus {
        *out.entry(predicate_class(q)).or_default() += 1;
    }
    out
}

pub(crate) fn has_or(q: &QueryAst) -> bool {
    fn walk(e: &PredicateExpr) -> bool {
        match e {
            PredicateExpr::Atom(_) => false,
            PredicateExpr::Or(_) => true,
            PredicateExpr::And(c) => c.iter().any(walk),
        }
    }
    q.where_clause.as_ref().is_some_and(walk)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub query_count: usize,
    /// Set for an empty corpus; every other field is then zero.
    pub empty: bool,
    pub category_counts: BTreeMap<QueryCategory, usize>,
    pub predicate_classes: BTreeMap<PredicateClass, usize>,
    /// Number of joins (FROM tables minus one) to query count.
    pub join_histogram: BTreeMap<usize, usize>,
    pub tables_touched: usize,
    pub table_coverage: f64,
    pub columns_touched: usize,
    pub column_coverage: f64,
    pub distinct_queries: usize,
    pub distinct_templates: usize,
    /// Share of queries that duplicate an earlier one under the canonical key.
    pub duplicate_rate: f64,
}

pub fn diversity(corpus: &[QueryAst], catalog: &SchemaCatalog) -> DiversityReport {
    let mut category_counts: BTreeMap<QueryCategory, usize> = [
        QueryCategory::SimpleSelection,
        QueryCategory::ComplexJoin,
        QueryCategory::Aggregation,
    ]
    .into_iter()
    .map(|c| (c, 0))
    .collect();
    let mut join_histogram = BTreeMap::new();
    let mut footprint = Footprint::default();
    let mut keys = HashSet::new();
    let mut skeletons = HashSet::new();
    for q in corpus {
        *category_counts.entry(QueryCategory::of(q)).or_default() += 1;
        *join_histogram.entry(q.from_tables.len().saturating_sub(1)).or_default() += 1;
        footprint.add(q, catalog);
        keys.insert(canonical_key(q));
        skeletons.insert(skeleton_key(q));
    }
    // Only catalog tables count toward coverage.
    let tables_touched = catalog
        .tables
        .iter()
        .filter(|t| footprint.tables.contains(&t.name.to_lowercase()))
        .count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let n = corpus.len();
    DiversityReport {
        query_count: n,
        empty: n == 0,
        category_counts,
        predicate_classes: class_counts(corpus),
        join_histogram,
        tables_touched,
        table_coverage: if n == 0 { 0.0 } else { ratio(tables_touched, catalog.tables.len()) },
        columns_touched: footprint.columns.len(),
        column_coverage: if n == 0 { 0.0 } else { ratio(footprint.columns.len(), catalog.total_columns()) },
        distinct_queries: keys.len(),
        distinct_templates: skeletons.len(),
        duplicate_rate: ratio(n - keys.len(), n),
    }
}

impl DiversityReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        if self.empty {
            s.push_str("Diversity: empty corpus\n");
            return s;
        }
        let _ = writeln!(s, "Diversity over {} queries", self.query_count);
        s.push_str("\nCategory              Count\n");
        for (c, n) in &self.category_counts {
            let _ = writeln!(s, "{:<20} {:>6}", c.label(), n);
        }
        s.push_str("\nPredicate class       Count\n");
        for (c, n) in &self.predicate_classes {
            let _ = writeln!(s, "{:<20} {:>6}", c.label(), n);
        }
        s.push_str("\nJoins                 Count\n");
        for (j, n) in &self.join_histogram {
            let _ = writeln!(s, "{:<20} {:>6}", j, n);
        }
        let _ = writeln!(s, "\nTable coverage        {:.4} ({} tables)", self.table_coverage, self.tables_touched);
        let _ = writeln!(s, "Column coverage       {:.4} ({} columns)", self.column_coverage, self.columns_touched);
        let _ = writeln!(s, "Distinct queries      {}", self.distinct_queries);
        let _ = writeln!(s, "Distinct templates    {}", self.distinct_templates);
        let _ = writeln!(s, "Duplicate rate        {:.4}", self.duplicate_rate);
        s
    }
}
