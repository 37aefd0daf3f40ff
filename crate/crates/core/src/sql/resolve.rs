//! Column resolution against a FROM list.

use std::fmt;

use crate::schema::{Database, SchemaCatalog};
use crate::sql::ast::{ColumnName, TableRef};
use crate::value::ValueType;

/// Anything that can describe a table's columns: the catalog or loaded data.
pub trait ColumnSource {
    fn table_columns(&self, table: &str) -> Option<Vec<(String, ValueType)>>;
}

impl ColumnSource for SchemaCatalog {
    fn table_columns(&self, table: &str) -> Option<Vec<(String, ValueType)>> {
        self.table(table).map(|t| {
            t.columns
                .iter()
                .map(|c| (c.name.clone(), c.value_type))
                .collect()
        })
    }
}

impl ColumnSource for Database {
    fn table_columns(&self, table: &str) -> Option<Vec<(String, ValueType)>> {
        self.get(table).map(|t| {
            t.column_names
                .iter()
                .cloned()
                .zip(t.column_types.iter().copied())
                .collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Resolved {
    pub table_idx: usize,
    pub column_idx: usize,
    pub value_type: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveError {
    UnknownTable(String),
    DuplicateBinding(String),
    UnknownQualifier(String),
    UnknownColumn(String),
    Ambiguous(String),
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::UnknownTable(t) => write!(f, "unknown table `{t}`"),
            ResolveError::DuplicateBinding(t) => write!(f, "table reference `{t}` appears twice without a distinct alias"),
            ResolveError::UnknownQualifier(q) => write!(f, "unknown table qualifier `{q}`"),
            ResolveError::UnknownColumn(c) => write!(f, "unknown column `{c}`"),
            ResolveError::Ambiguous(c) => write!(f, "ambiguous column `{c}`"),
        }
    }
}

struct BoundTable {
    binding: String,
    name: String,
    columns: Vec<(String, ValueType)>,
}

/// Name-resolution scope of one query level.
pub struct Scope {
    tables: Vec<BoundTable>,
}

impl Scope {
    pub fn new(source: &dyn ColumnSource, from: &[TableRef]) -> Result<Scope, ResolveError> {
        let mut tables: Vec<BoundTable> = Vec::with_capacity(from.len());
        for t in from {
            let columns = source
                .table_columns(&t.name)
                .ok_or_else(|| ResolveError::UnknownTable(t.name.clone()))?;
            if tables
                .iter()
                .any(|b| b.binding.eq_ignore_ascii_case(t.binding()))
            {
                return Err(ResolveError::DuplicateBinding(t.binding().to_string()));
            }
            tables.push(BoundTable {
                binding: t.binding().to_string(),
                name: t.name.clone(),
                columns,
            });
        }
        Ok(Scope { tables })
    }

    pub fn resolve(&self, col: &ColumnName) -> Result<Resolved, ResolveError> {
        let find = |ti: usize| {
            self.tables[ti]
                .columns
                .iter()
                .position(|(n, _)| n.eq_ignore_ascii_case(&col.name))
                .map(|ci| Resolved {
                    table_idx: ti,
                    column_idx: ci,
                    value_type: self.tables[ti].columns[ci].1,
                })
        };
        match &col.qualifier {
            Some(q) => {
                let ti = self
                    .tables
                    .iter()
                    .position(|b| b.binding.eq_ignore_ascii_case(q))
                    .or_else(|| {
                        // A table aliased elsewhere may still be named by its real name
                        // when that name is unambiguous.
                        let hits: Vec<_> = self
                            .tables
                            .iter()
                            .enumerate()
                            .filter(|(_, b)| b.name.eq_ignore_ascii_case(q))
                            .map(|(i, _)| i)
                            .collect();
                        (hits.len() == 1).then(|| hits[0])
                    })
                    .ok_or_else(|| ResolveError::UnknownQualifier(q.clone()))?;
                find(ti).ok_or_else(|| ResolveError::UnknownColumn(col.to_string()))
            }
            None => {
                let hits: Vec<Resolved> = (0..self.tables.len()).filter_map(find).collect();
                match hits.len() {
                    0 => Err(ResolveError::UnknownColumn(col.to_string())),
                    1 => Ok(hits[0]),
                    _ => Err(ResolveError::Ambiguous(col.to_string())),
                }
            }
        }
    }

    pub fn table_name(&self, idx: usize) -> &str {
        &self.tables[idx].name
    }

    pub fn column_name(&self, r: Resolved) -> &str {
        &self.tables[r.table_idx].columns[r.column_idx].0
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}
