//! Workload entries shared by generation, labeling and planning.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::artifact;
use crate::error::{Error, Result};
use crate::schema::SchemaCatalog;
use crate::sql::{parse_sql, print_sql, split_statements, ColumnName, Dialect, Projection, QueryAst, QueryCategory, Scope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Returned by a generation provider.
    Provider,
    /// Produced by a single mutation edit of an accepted query.
    Mutation,
    /// Read from a query file.
    File,
}

impl Origin {
    pub fn label(self) -> &'static str {
        match self {
            Origin::Provider => "provider",
            Origin::Mutation => "mutation",
            Origin::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadQuery {
    pub id: String,
    pub sql: String,
    pub category: QueryCategory,
    pub origin: Origin,
    pub ast: QueryAst,
}

impl WorkloadQuery {
    pub fn new(id: impl Into<String>, ast: QueryAst, origin: Origin) -> Self {
        Self {
            id: id.into(),
            sql: print_sql(&ast, Dialect::Generic),
            category: QueryCategory::of(&ast),
            origin,
            ast,
        }
    }
}

pub fn query_id(index: usize) -> String {
    format!("q{:05}", index + 1)
}

const HEADER: [&str; 4] = ["query_id", "category", "origin", "sql"];

pub fn queries_csv(seed: Option<u64>, queries: &[WorkloadQuery]) -> Result<Vec<u8>> {
    artifact::csv_bytes(
        seed,
        &HEADER,
        queries.iter().map(|q| {
            [
                q.id.clone(),
                q.category.label().to_string(),
                q.origin.label().to_string(),
                q.sql.clone(),
            ]
        }),
    )
}

/// Reads `queries.csv`, or a plain `.sql` file of `;`-separated statements.
pub fn read_queries(path: &Path) -> Result<Vec<WorkloadQuery>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("sql")) {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return split_statements(&text)
            .iter()
            .enumerate()
            .map(|(i, s)| Ok(WorkloadQuery::new(query_id(i), parse_sql(s)?, Origin::File)))
            .collect();
    }
    let (_, mut rdr) = artifact::read_csv(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let (id_i, sql_i) = (col("query_id")?, col("sql")?);
    let origin_i = headers.iter().position(|h| h == "origin");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let ast = parse_sql(&rec[sql_i])?;
        let origin = match origin_i.map(|i| &rec[i]) {
            Some("provider") => Origin::Provider,
            Some("mutation") => Origin::Mutation,
            _ => Origin::File,
        };
        let mut q = WorkloadQuery::new(&rec[id_i], ast, origin);
        q.sql = rec[sql_i].to_string();
        out.push(q);
    }
    Ok(out)
}

/// Tables and `table.column` pairs a query touches, lowercased. Columns
/// that do not resolve against the catalog are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Footprint {
    pub tables: BTreeSet<String>,
    pub columns: BTreeSet<(String, String)>,
}

impl Footprint {
    pub fn of(q: &QueryAst, catalog: &SchemaCatalog) -> Self {
        let mut fp = Footprint::default();
        fp.add(q, catalog);
        fp
    }

    pub fn add(&mut self, q: &QueryAst, catalog: &SchemaCatalog) {
        for t in &q.from_tables {
            self.tables.insert(t.name.to_lowercase());
        }
        let Ok(scope) = Scope::new(catalog, &q.from_tables) else {
            return;
        };
        let mut cols: Vec<&ColumnName> = Vec::new();
        for p in &q.projections {
            match &p.item {
                Projection::Column { column } | Projection::Aggregate { arg: Some(column), .. } => cols.push(column),
                _ => {}
            }
        }
        for j in &q.join_predicates {
            cols.push(&j.left);
            cols.push(&j.right);
        }
        cols.extend(q.group_by.iter());
        for a in q.atoms() {
            cols.push(a.column());
        }
        for c in cols {
            if let Ok(r) = scope.resolve(c) {
                self.columns.insert((
                    scope.table_name(r.table_idx).to_lowercase(),
                    scope.column_name(r).to_lowercase(),
                ));
            }
        }
        for sub in q.subqueries() {
            self.add(sub, catalog);
        }
    }

    /// Whether everything in `self` also appears in `other`.
    pub fn within(&self, other: &Footprint) -> bool {
        self.tables.is_subset(&other.tables) && self.columns.is_subset(&other.columns)
    }
}
