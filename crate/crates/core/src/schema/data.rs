use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::{SchemaCatalog, TableDef};
use crate::value::{Value, ValueType};

/// Columnar, fully typed contents of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    pub table: String,
    pub column_names: Vec<String>,
    pub column_types: Vec<ValueType>,
    pub columns: Vec<Vec<Value>>,
    pub row_count: usize,
}

impl TableData {
    pub fn empty(def: &TableDef) -> Self {
        Self {
            table: def.name.clone(),
            column_names: def.columns.iter().map(|c| c.name.clone()).collect(),
            column_types: def.columns.iter().map(|c| c.value_type).collect(),
            columns: vec![Vec::new(); def.columns.len()],
            row_count: 0,
        }
    }

    /// Builds table data from row-major values, checking arity and types.
    pub fn from_rows(def: &TableDef, rows: Vec<Vec<Value>>) -> Result<Self> {
        let mut data = Self::empty(def);
        for (ri, row) in rows.into_iter().enumerate() {
            if row.len() != data.columns.len() {
                return Err(Error::Data {
                    table: def.name.clone(),
                    row: Some(ri),
                    column: None,
                    message: format!("expected {} fields, found {}", data.columns.len(), row.len()),
                });
            }
            for (ci, v) in row.into_iter().enumerate() {
                let expected = data.column_types[ci];
                let ok = v.value_type() == expected
                    || (expected == ValueType::Decimal && v.value_type() == ValueType::Integer);
                if !ok {
                    return Err(Error::Data {
                        table: def.name.clone(),
                        row: Some(ri),
                        column: Some(data.column_names[ci].clone()),
                        message: format!("expected {expected}, found {}", v.value_type()),
                    });
                }
                let v = match (expected, v) {
                    (ValueType::Decimal, Value::Int(i)) => Value::Dec(i as f64),
                    (_, v) => v,
                };
                data.columns[ci].push(v);
            }
            data.row_count += 1;
        }
        Ok(data)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
    }

    pub fn column(&self, name: &str) -> Option<&[Value]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    /// Keeps only the rows whose index passes `keep`.
    pub fn filter_rows(&self, mut keep: impl FnMut(usize) -> bool) -> TableData {
        let rows: Vec<usize> = (0..self.row_count).filter(|&r| keep(r)).collect();
        TableData {
            table: self.table.clone(),
            column_names: self.column_names.clone(),
            column_types: self.column_types.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r].clone()).collect())
                .collect(),
            row_count: rows.len(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.column_names)?;
        for r in 0..self.row_count {
            w.write_record(self.columns.iter().map(|c| c[r].to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Loaded tables keyed by lower-cased table name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Database {
    tables: BTreeMap<String, TableData>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, data: TableData) {
        self.tables.insert(data.table.to_ascii_lowercase(), data);
    }

    pub fn get(&self, table: &str) -> Option<&TableData> {
        self.tables.get(&table.to_ascii_lowercase())
    }

    pub fn remove(&mut self, table: &str) -> Option<TableData> {
        self.tables.remove(&table.to_ascii_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &TableData> {
        self.tables.values()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

impl FromIterator<TableData> for Database {
    fn from_iter<I: IntoIterator<Item = TableData>>(iter: I) -> Self {
        let mut db = Database::new();
        for t in iter {
            db.insert(t);
        }
        db
    }
}

/// Loads `<table>.csv` for every catalog table from `data_dir`.
pub fn load_table_data(catalog: &SchemaCatalog, data_dir: impl AsRef<Path>) -> Result<Database> {
    let dir = data_dir.as_ref();
    let mut db = Database::new();
    for def in &catalog.tables {
        let path = dir.join(format!("{}.csv", def.name));
        if !path.is_file() {
            return Err(Error::Data {
                table: def.name.clone(),
                row: None,
                column: None,
                message: format!("missing data file {}", path.display()),
            });
        }
        db.insert(load_table_csv(def, &path)?);
    }
    Ok(db)
}

fn load_table_csv(def: &TableDef, path: &Path) -> Result<TableData> {
    let data_err = |row: Option<usize>, column: Option<String>, message: String| Error::Data {
        table: def.name.clone(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| data_err(None, None, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| data_err(None, None, e.to_string()))?
        .clone();

    // Map schema columns to CSV positions.
    let mut positions = Vec::with_capacity(def.columns.len());
    for col in &def.columns {
        let pos = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(&col.name))
            .ok_or_else(|| {
                data_err(None, Some(col.name.clone()), "column missing from header".into())
            })?;
        positions.push(pos);
    }
    if headers.len() != def.columns.len() {
        return Err(data_err(
            None,
            None,
            format!(
                "header has {} columns, schema declares {}",
                headers.len(),
                def.columns.len()
            ),
        ));
    }

    let mut data = TableData::empty(def);
    for (ri, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let msg = match e.kind() {
                csv::ErrorKind::UnequalLengths { .. } => format!("ragged row: {e}"),
                _ => e.to_string(),
            };
            data_err(Some(ri), None, msg)
        })?;
        for (ci, col) in def.columns.iter().enumerate() {
            let raw = &record[positions[ci]];
            let v = Value::parse_typed(raw, col.value_type).ok_or_else(|| {
                data_err(
                    Some(ri),
                    Some(col.name.clone()),
                    format!("cannot parse {raw:?} as {}", col.value_type),
                )
            })?;
            data.columns[ci].push(v);
        }
        data.row_count += 1;
    }
    Ok(data)
}
