use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::value::ValueType;

/// A `table.column` reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        Self {
            table: table.into(),
            column: column.into(),
        }
    }

    pub fn matches(&self, table: &str, column: &str) -> bool {
        self.table.eq_ignore_ascii_case(table) && self.column.eq_ignore_ascii_case(column)
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

impl FromStr for ColumnRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((t, c)) if !t.is_empty() && !c.is_empty() && !c.contains('.') => {
                Ok(ColumnRef::new(t.trim(), c.trim()))
            }
            _ => Err(format!("expected `table.column`, got `{s}`")),
        }
    }
}

impl Serialize for ColumnRef {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ColumnRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: ValueType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub primary_key: String,
    /// Secondary indexes; the primary key is always indexed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indexes: Vec<String>,
}

impl TableDef {
    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn is_indexed(&self, column: &str) -> bool {
        self.primary_key.eq_ignore_ascii_case(column)
            || self.indexes.iter().any(|i| i.eq_ignore_ascii_case(column))
    }

    /// Indexed columns in declaration order, primary key first.
    pub fn indexed_columns(&self) -> Vec<&str> {
        let mut out = vec![self.primary_key.as_str()];
        for i in &self.indexes {
            if !out.iter().any(|o| o.eq_ignore_ascii_case(i)) {
                out.push(i.as_str());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from: ColumnRef,
    pub to: ColumnRef,
}

impl ForeignKey {
    /// Whether this edge connects the two columns, in either direction.
    pub fn connects(&self, a: &ColumnRef, b: &ColumnRef) -> bool {
        let same = |x: &ColumnRef, y: &ColumnRef| x.matches(&y.table, &y.column);
        (same(&self.from, a) && same(&self.to, b)) || (same(&self.from, b) && same(&self.to, a))
    }

    pub fn touches(&self, table: &str) -> bool {
        self.from.table.eq_ignore_ascii_case(table) || self.to.table.eq_ignore_ascii_case(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaCatalog {
    pub tables: Vec<TableDef>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

impl SchemaCatalog {
    /// Loads and validates a JSON schema file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Schema { location, message } => Error::Schema {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let catalog: SchemaCatalog = serde_json::from_str(text).map_err(|e| Error::Schema {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |location: String, message: String| Err(Error::Schema { location, message });
        if self.tables.is_empty() {
            return err("tables".into(), "no tables".into());
        }
        let mut names = HashSet::new();
        for (ti, t) in self.tables.iter().enumerate() {
            let loc = format!("tables[{ti}] ({})", t.name);
            if t.name.trim().is_empty() {
                return err(loc, "empty table name".into());
            }
            if !names.insert(t.name.to_ascii_lowercase()) {
                return err(loc, format!("duplicate table `{}`", t.name));
            }
            if t.columns.is_empty() {
                return err(loc, "table has no columns".into());
            }
            let mut cols = HashSet::new();
            for (ci, c) in t.columns.iter().enumerate() {
                if !cols.insert(c.name.to_ascii_lowercase()) {
                    return err(
                        format!("{loc}.columns[{ci}]"),
                        format!("duplicate column `{}`", c.name),
                    );
                }
            }
            if t.column(&t.primary_key).is_none() {
                return err(
                    loc,
                    format!("primary key `{}` is not a column", t.primary_key),
                );
            }
            for idx in &t.indexes {
                if t.column(idx).is_none() {
                    return err(loc, format!("index on unknown column `{idx}`"));
                }
            }
        }
        for (fi, fk) in self.foreign_keys.iter().enumerate() {
            let loc = format!("foreign_keys[{fi}] ({} -> {})", fk.from, fk.to);
            let from = self.column_type(&fk.from.table, &fk.from.column);
            let to = self.column_type(&fk.to.table, &fk.to.column);
            match (from, to) {
                (None, _) => return err(loc, format!("dangling foreign key: `{}` does not exist", fk.from)),
                (_, None) => return err(loc, format!("dangling foreign key: `{}` does not exist", fk.to)),
                (Some(a), Some(b)) if a != b => {
                    return err(loc, format!("type mismatch: {a} vs {b}"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn column_type(&self, table: &str, column: &str) -> Option<ValueType> {
        self.table(table)?.column(column).map(|c| c.value_type)
    }

    pub fn is_indexed(&self, table: &str, column: &str) -> bool {
        self.table(table).is_some_and(|t| t.is_indexed(column))
    }

    pub fn is_foreign_key_edge(&self, a: &ColumnRef, b: &ColumnRef) -> bool {
        self.foreign_keys.iter().any(|fk| fk.connects(a, b))
    }

    /// Foreign-key edges with one endpoint in `table`.
    pub fn edges_of<'a>(&'a self, table: &'a str) -> impl Iterator<Item = &'a ForeignKey> + 'a {
        self.foreign_keys.iter().filter(move |fk| fk.touches(table))
    }

    pub fn total_columns(&self) -> usize {
        self.tables.iter().map(|t| t.columns.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "tables": [
            {"name": "movies", "columns": [{"name": "id", "type": "integer"}, {"name": "rating", "type": "decimal"}], "primary_key": "id"},
            {"name": "cast_info", "columns": [{"name": "id", "type": "integer"}, {"name": "movie_id", "type": "integer"}], "primary_key": "id", "indexes": ["movie_id"]}
        ],
        "foreign_keys": [{"from": "cast_info.movie_id", "to": "movies.id"}]
    }"#;

    #[test]
    fn loads_valid_schema() {
        let c = SchemaCatalog::from_json_str(SMALL).unwrap();
        assert_eq!(c.tables.len(), 2);
        assert!(c.is_indexed("CAST_INFO", "movie_id"));
        assert!(c.is_foreign_key_edge(
            &ColumnRef::new("movies", "id"),
            &ColumnRef::new("cast_info", "movie_id")
        ));
    }

    #[test]
    fn rejects_dangling_foreign_key() {
        let text = SMALL.replace("movies.id\"}", "studios.id\"}");
        let err = SchemaCatalog::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("dangling"), "{err}");
        assert!(err.to_string().contains("foreign_keys[0]"), "{err}");
    }

    #[test]
    fn rejects_empty_table_list() {
        let err = SchemaCatalog::from_json_str(r#"{"tables": []}"#).unwrap_err();
        assert!(err.to_string().contains("no tables"));
    }

    #[test]
    fn rejects_duplicates_case_insensitively() {
        let text = SMALL.replace("\"cast_info\"", "\"MOVIES\"");
        let err = SchemaCatalog::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate table"), "{err}");

        let text = SMALL.replace("\"rating\"", "\"ID\"");
        let err = SchemaCatalog::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate column"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = SchemaCatalog::from_json_str("{\"tables\": [\n  {oops}]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn foreign_key_types_must_match() {
        let text = SMALL.replace(
            r#"{"name": "movie_id", "type": "integer"}"#,
            r#"{"name": "movie_id", "type": "text"}"#,
        );
        let err = SchemaCatalog::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("type mismatch"), "{err}");
    }
}
