//! Semantic validation of a query against the catalog.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::schema::{ColumnRef, SchemaCatalog};
use crate::sql::ast::*;
use crate::sql::resolve::{Resolved, Scope};
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownTable,
    DuplicateTableReference,
    UnknownColumn,
    AmbiguousColumn,
    TypeMismatch,
    InvertedBetween,
    EmptyProjection,
    DisconnectedJoinGraph,
    SelfJoinPredicate,
    NonForeignKeyJoin,
    GroupByMismatch,
    InvalidSubquery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no error-severity findings exist; warnings are allowed.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// First error rendered as text, for rejection reasons.
    pub fn summary(&self) -> String {
        self.errors()
            .map(|v| v.message.clone())
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn push(&mut self, severity: Severity, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation {
            severity,
            kind,
            message: message.into(),
        });
    }

    fn error(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.push(Severity::Error, kind, message);
    }
}

pub fn validate(q: &QueryAst, catalog: &SchemaCatalog) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_level(q, catalog, 0, &mut report);
    report
}

fn validate_level(q: &QueryAst, catalog: &SchemaCatalog, depth: usize, report: &mut ValidationReport) {
    use ViolationKind::*;

    if q.projections.is_empty() {
        report.error(EmptyProjection, "query projects nothing");
    }
    if q.from_tables.is_empty() {
        report.error(UnknownTable, "query has no FROM tables");
        return;
    }
    for t in &q.from_tables {
        if catalog.table(&t.name).is_none() {
            report.error(UnknownTable, format!("unknown table `{}`", t.name));
        }
    }
    if report.has(UnknownTable) {
        return;
    }
    let scope = match Scope::new(catalog, &q.from_tables) {
        Ok(s) => s,
        Err(e) => {
            report.error(DuplicateTableReference, e.to_string());
            return;
        }
    };
    let resolve = |c: &ColumnName, report: &mut ValidationReport| -> Option<Resolved> {
        match scope.resolve(c) {
            Ok(r) => Some(r),
            Err(e @ crate::sql::ResolveError::Ambiguous(_)) => {
                report.error(AmbiguousColumn, e.to_string());
                None
            }
            Err(e) => {
                report.error(UnknownColumn, e.to_string());
                None
            }
        }
    };

    // Projections.
    let mut plain_columns = Vec::new();
    for item in &q.projections {
        match &item.item {
            Projection::Star => {}
            Projection::Column { column } => {
                if let Some(r) = resolve(column, report) {
                    plain_columns.push((column, r));
                }
            }
            Projection::Aggregate { func, arg } => {
                if let Some(arg) = arg {
                    if let Some(r) = resolve(arg, report) {
                        if *func != AggregateFn::Count && !r.value_type.is_numeric() {
                            report.error(
                                TypeMismatch,
                                format!("{}({arg}) over non-numeric column", func.sql()),
                            );
                        }
                    }
                }
            }
        }
    }

    // Grouping.
    let grouped: Vec<Resolved> = q
        .group_by
        .iter()
        .filter_map(|c| resolve(c, report))
        .collect();
    let has_star = q.projections.iter().any(|p| p.item == Projection::Star);
    if !q.group_by.is_empty() || q.has_aggregate() {
        if has_star {
            report.error(GroupByMismatch, "`*` projected from an aggregating query");
        }
        for (name, r) in &plain_columns {
            if !grouped.contains(r) {
                report.error(
                    GroupByMismatch,
                    format!("projected column `{name}` is neither grouped nor aggregated"),
                );
            }
        }
    }

    // Join predicates and connectivity.
    let mut parent: Vec<usize> = (0..q.from_tables.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for j in &q.join_predicates {
        let (Some(l), Some(r)) = (resolve(&j.left, report), resolve(&j.right, report)) else {
            continue;
        };
        if !l.value_type.comparable_with(r.value_type) {
            report.error(
                TypeMismatch,
                format!("join `{} = {}` compares {} with {}", j.left, j.right, l.value_type, r.value_type),
            );
        }
        if l.table_idx == r.table_idx {
            report.error(
                SelfJoinPredicate,
                format!("join predicate `{} = {}` stays within one table", j.left, j.right),
            );
            continue;
        }
        let (a, b) = (find(&mut parent, l.table_idx), find(&mut parent, r.table_idx));
        parent[a] = b;
        let lref = ColumnRef::new(scope.table_name(l.table_idx), scope.column_name(l));
        let rref = ColumnRef::new(scope.table_name(r.table_idx), scope.column_name(r));
        if !catalog.is_foreign_key_edge(&lref, &rref) {
            report.push(
                Severity::Warning,
                NonForeignKeyJoin,
                format!("join `{lref} = {rref}` does not follow a foreign key"),
            );
        }
    }
    if q.from_tables.len() > 1 {
        let root = find(&mut parent, 0);
        if (1..q.from_tables.len()).any(|i| find(&mut parent, i) != root) {
            report.error(
                DisconnectedJoinGraph,
                "join graph over the FROM tables is disconnected",
            );
        }
    }

    // WHERE atoms.
    if let Some(w) = &q.where_clause {
        for atom in w.atoms() {
            let Some(r) = resolve(atom.column(), report) else {
                continue;
            };
            let col = atom.column();
            let check = |v: &Value, report: &mut ValidationReport| {
                if !r.value_type.comparable_with(v.value_type()) {
                    report.error(
                        TypeMismatch,
                        format!("`{col}` is {} but is compared with {}", r.value_type, v.to_sql_literal()),
                    );
                }
            };
            match atom {
                Atom::Compare { value, .. } => check(value, report),
                Atom::Between { low, high, .. } => {
                    check(low, report);
                    check(high, report);
                    if low.compare(high) == Some(std::cmp::Ordering::Greater) {
                        report.error(
                            InvertedBetween,
                            format!("`{col} BETWEEN` has lower bound above upper bound"),
                        );
                    }
                }
                Atom::InList { values, .. } => {
                    if values.is_empty() {
                        report.error(TypeMismatch, format!("`{col} IN ()` has no values"));
                    }
                    values.iter().for_each(|v| check(v, report));
                }
                Atom::InSubquery { subquery, .. } => {
                    if depth >= 1 {
                        report.error(InvalidSubquery, "subquery nested deeper than one level");
                        continue;
                    }
                    validate_subquery(subquery, catalog, r.value_type, col, report);
                }
            }
        }
    }
}

fn validate_subquery(
    sub: &QueryAst,
    catalog: &SchemaCatalog,
    outer_type: ValueType,
    outer: &ColumnName,
    report: &mut ValidationReport,
) {
    let before = report.violations.len();
    validate_level(sub, catalog, 1, report);
    for v in &mut report.violations[before..] {
        v.message = format!("in subquery: {}", v.message);
    }
    if sub.projections.len() != 1 {
        report.error(
            ViolationKind::InvalidSubquery,
            "IN subquery must project exactly one column",
        );
        return;
    }
    let projected = match &sub.projections[0].item {
        Projection::Star => {
            report.error(ViolationKind::InvalidSubquery, "IN subquery cannot project `*`");
            return;
        }
        Projection::Column { column } => column_type(sub, catalog, column),
        Projection::Aggregate { func: AggregateFn::Count, .. } => Some(ValueType::Integer),
        Projection::Aggregate { func: AggregateFn::Avg, .. } => Some(ValueType::Decimal),
        Projection::Aggregate { arg, .. } => arg.as_ref().and_then(|a| column_type(sub, catalog, a)),
    };
    if let Some(t) = projected {
        if !t.comparable_with(outer_type) {
            report.error(
                ViolationKind::TypeMismatch,
                format!("`{outer}` is {outer_type} but its IN subquery yields {t}"),
            );
        }
    }
}

fn column_type(q: &QueryAst, catalog: &SchemaCatalog, c: &ColumnName) -> Option<ValueType> {
    let scope = Scope::new(catalog, &q.from_tables).ok()?;
    scope.resolve(c).ok().map(|r| r.value_type)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::parse_sql;

    fn catalog() -> SchemaCatalog {
        SchemaCatalog::from_json_str(
            r#"{"tables": [
                {"name": "movies", "columns": [
                    {"name": "id", "type": "integer"}, {"name": "rating", "type": "decimal"},
                    {"name": "release_year", "type": "integer"}, {"name": "genre", "type": "text"}],
                 "primary_key": "id"},
                {"name": "cast_info", "columns": [
                    {"name": "id", "type": "integer"}, {"name": "movie_id", "type": "integer"},
                    {"name": "nr_order", "type": "integer"}],
                 "primary_key": "id"}],
              "foreign_keys": [{"from": "cast_info.movie_id", "to": "movies.id"}]}"#,
        )
        .unwrap()
    }

    fn check(sql: &str) -> ValidationReport {
        validate(&parse_sql(sql).unwrap(), &catalog())
    }

    #[test]
    fn valid_range_query() {
        let r = check("SELECT * FROM movies WHERE rating > 7.5");
        assert!(r.violations.is_empty(), "{r:?}");
    }

    #[test]
    fn type_mismatch_is_reported() {
        let r = check("SELECT * FROM movies WHERE release_year = 'abc'");
        assert!(r.has(ViolationKind::TypeMismatch));
        assert!(!r.is_valid());
    }

    #[test]
    fn missing_join_predicate_disconnects() {
        let r = check("SELECT * FROM movies, cast_info WHERE rating > 5");
        assert!(r.has(ViolationKind::DisconnectedJoinGraph));
    }

    #[test]
    fn non_fk_join_is_only_a_warning() {
        let r = check("SELECT * FROM movies m, cast_info c WHERE m.release_year = c.nr_order");
        assert!(r.is_valid());
        assert!(r.has(ViolationKind::NonForeignKeyJoin));
        let r = check("SELECT * FROM movies m, cast_info c WHERE m.id = c.movie_id");
        assert!(r.violations.is_empty(), "{r:?}");
    }

    #[test]
    fn unknown_and_ambiguous_columns() {
        assert!(check("SELECT * FROM movies WHERE budget > 1").has(ViolationKind::UnknownColumn));
        assert!(check("SELECT * FROM movies, cast_info WHERE movies.id = cast_info.movie_id AND id = 3")
            .has(ViolationKind::AmbiguousColumn));
        assert!(check("SELECT * FROM studios").has(ViolationKind::UnknownTable));
    }

    #[test]
    fn grouping_rules() {
        assert!(check("SELECT genre, COUNT(*) FROM movies GROUP BY genre").is_valid());
        assert!(check("SELECT genre, rating FROM movies GROUP BY genre").has(ViolationKind::GroupByMismatch));
        assert!(check("SELECT AVG(genre) FROM movies").has(ViolationKind::TypeMismatch));
    }

    #[test]
    fn between_bounds_and_subqueries() {
        assert!(check("SELECT * FROM movies WHERE rating BETWEEN 9 AND 2").has(ViolationKind::InvertedBetween));
        assert!(check("SELECT * FROM movies WHERE id IN (SELECT movie_id FROM cast_info WHERE nr_order = 1)").is_valid());
        assert!(check("SELECT * FROM movies WHERE id IN (SELECT * FROM cast_info)").has(ViolationKind::InvalidSubquery));
        assert!(check("SELECT * FROM movies WHERE genre IN (SELECT movie_id FROM cast_info)").has(ViolationKind::TypeMismatch));
    }
}
