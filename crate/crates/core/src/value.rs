//! Typed scalar values shared by the catalog, the SQL AST and the executor.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Integer,
    Decimal,
    Text,
}

impl ValueType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Decimal)
    }

    /// Whether values of the two types can be compared with each other.
    pub fn comparable_with(self, other: ValueType) -> bool {
        (self.is_numeric() && other.is_numeric()) || self == other
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Integer => "integer",
            ValueType::Decimal => "decimal",
            ValueType::Text => "text",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Dec(f64),
    Text(String),
}

/// Hashable equality key. Integral decimals collapse onto integers so that
/// `7` and `7.0` join and group together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKey {
    Int(i64),
    Dec(u64),
    Text(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Integer,
            Value::Dec(_) => ValueType::Decimal,
            Value::Text(_) => ValueType::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Dec(d) => Some(*d),
            Value::Text(_) => None,
        }
    }

    /// SQL comparison; `None` when the operands are not comparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Text(_), _) | (_, Value::Text(_)) => None,
            (a, b) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        }
    }

    /// Total order used for sorting: numbers before text, numbers by value.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Text(_), _) => Ordering::Greater,
            (_, Value::Text(_)) => Ordering::Less,
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (a, b) => {
                let (x, y) = (a.as_f64().unwrap_or(0.0), b.as_f64().unwrap_or(0.0));
                x.total_cmp(&y)
            }
        }
    }

    pub fn key(&self) -> ValueKey {
        match self {
            Value::Int(i) => ValueKey::Int(*i),
            Value::Dec(d) => {
                if d.fract() == 0.0 && d.abs() < 9.0e15 {
                    ValueKey::Int(*d as i64)
                } else {
                    ValueKey::Dec(d.to_bits())
                }
            }
            Value::Text(s) => ValueKey::Text(s.clone()),
        }
    }

    /// Parses a raw field (e.g. a CSV cell) as the declared type.
    pub fn parse_typed(raw: &str, ty: ValueType) -> Option<Value> {
        let s = raw.trim();
        match ty {
            ValueType::Integer => s.parse::<i64>().ok().map(Value::Int),
            ValueType::Decimal => s
                .parse::<f64>()
                .ok()
                .filter(|d| d.is_finite())
                .map(Value::Dec),
            ValueType::Text => Some(Value::Text(raw.to_string())),
        }
    }

    /// Renders the value as a SQL literal that the parser reads back to the same value.
    pub fn to_sql_literal(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Dec(d) => format!("{d:?}"),
            Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Dec(d) => write!(f, "{d}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}
