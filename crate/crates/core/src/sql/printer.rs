use serde::{Deserialize, Serialize};

use crate::sql::ast::*;
use crate::value::Value;

/// Output dialect. Only identifier quoting differs between the two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    #[default]
    Generic,
    /// Every identifier double-quoted.
    PostgresLike,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PrintOptions {
    pub dialect: Dialect,
    /// Replace literals with `?` (template skeletons).
    pub mask_constants: bool,
    /// Lower-case unquoted identifiers (canonical keys).
    pub lowercase_identifiers: bool,
}

pub fn print_sql(q: &QueryAst, dialect: Dialect) -> String {
    print_with(
        q,
        PrintOptions {
            dialect,
            ..Default::default()
        },
    )
}

pub(crate) fn print_with(q: &QueryAst, opts: PrintOptions) -> String {
    let mut p = Printer { opts, out: String::new() };
    p.query(q);
    p.out
}

const KEYWORDS: &[&str] = &[
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "AND", "OR", "NOT", "IN", "BETWEEN", "AS", "JOIN",
    "INNER", "ON", "ORDER", "LIMIT", "OFFSET", "HAVING", "UNION", "INTERSECT", "EXCEPT", "LEFT",
    "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL", "DISTINCT", "LIKE", "IS", "NULL", "EXISTS",
    "WITH", "CASE", "USING", "ALL", "ANY", "WINDOW", "FETCH",
];

fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

struct Printer {
    opts: PrintOptions,
    out: String,
}

impl Printer {
    fn ident(&mut self, s: &str) {
        let lowered;
        let s = if self.opts.lowercase_identifiers {
            lowered = s.to_ascii_lowercase();
            lowered.as_str()
        } else {
            s
        };
        let quote = self.opts.dialect == Dialect::PostgresLike || !is_plain_identifier(s);
        if quote {
            self.out.push('"');
            self.out.push_str(&s.replace('"', "\"\""));
            self.out.push('"');
        } else {
            self.out.push_str(s);
        }
    }

    fn column(&mut self, c: &ColumnName) {
        if let Some(q) = &c.qualifier {
            self.ident(q);
            self.out.push('.');
        }
        self.ident(&c.name);
    }

    fn literal(&mut self, v: &Value) {
        if self.opts.mask_constants {
            self.out.push('?');
        } else {
            self.out.push_str(&v.to_sql_literal());
        }
    }

    fn query(&mut self, q: &QueryAst) {
        self.out.push_str("SELECT ");
        for (i, item) in q.projections.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            match &item.item {
                Projection::Star => self.out.push('*'),
                Projection::Column { column } => self.column(column),
                Projection::Aggregate { func, arg } => {
                    self.out.push_str(func.sql());
                    self.out.push('(');
                    match arg {
                        Some(c) => self.column(c),
                        None => self.out.push('*'),
                    }
                    self.out.push(')');
                }
            }
            if let Some(a) = &item.alias {
                self.out.push_str(" AS ");
                self.ident(a);
            }
        }
        self.out.push_str(" FROM ");
        for (i, t) in q.from_tables.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.ident(&t.name);
            if let Some(a) = &t.alias {
                self.out.push(' ');
                self.ident(a);
            }
        }

        let conjuncts: Vec<&PredicateExpr> = q
            .where_clause
            .as_ref()
            .map(|w| w.conjuncts())
            .unwrap_or_default();
        if !q.join_predicates.is_empty() || !conjuncts.is_empty() {
            self.out.push_str(" WHERE ");
            let mut first = true;
            for j in &q.join_predicates {
                if !first {
                    self.out.push_str(" AND ");
                }
                first = false;
                self.column(&j.left);
                self.out.push_str(" = ");
                self.column(&j.right);
            }
            // A lone OR without join predicates needs no parentheses.
            let bare_or = q.join_predicates.is_empty() && conjuncts.len() == 1;
            for c in conjuncts {
                if !first {
                    self.out.push_str(" AND ");
                }
                first = false;
                if bare_or {
                    self.expr(c);
                } else {
                    self.nested(c);
                }
            }
        }
        if !q.group_by.is_empty() {
            self.out.push_str(" GROUP BY ");
            for (i, c) in q.group_by.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                self.column(c);
            }
        }
    }

    /// Prints a child of a boolean node, parenthesizing compound children.
    fn nested(&mut self, e: &PredicateExpr) {
        match e {
            PredicateExpr::Atom(a) => self.atom(a),
            _ => {
                self.out.push('(');
                self.expr(e);
                self.out.push(')');
            }
        }
    }

    fn expr(&mut self, e: &PredicateExpr) {
        match e {
            PredicateExpr::Atom(a) => self.atom(a),
            PredicateExpr::And(children) | PredicateExpr::Or(children) => {
                let sep = if matches!(e, PredicateExpr::And(_)) {
                    " AND "
                } else {
                    " OR "
                };
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(sep);
                    }
                    self.nested(c);
                }
            }
        }
    }

    fn atom(&mut self, a: &Atom) {
        match a {
            Atom::Compare { column, op, value } => {
                self.column(column);
                self.out.push(' ');
                self.out.push_str(op.sql());
                self.out.push(' ');
                self.literal(value);
            }
            Atom::Between { column, low, high } => {
                self.column(column);
                self.out.push_str(" BETWEEN ");
                self.literal(low);
                self.out.push_str(" AND ");
                self.literal(high);
            }
            Atom::InList { column, values } => {
                self.column(column);
                self.out.push_str(" IN (");
                if self.opts.mask_constants {
                    self.out.push('?');
                } else {
                    for (i, v) in values.iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        self.literal(v);
                    }
                }
                self.out.push(')');
            }
            Atom::InSubquery { column, subquery } => {
                self.column(column);
                self.out.push_str(" IN (");
                self.query(subquery);
                self.out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::parse_sql;

    #[test]
    fn prints_generic_and_postgres() {
        let q = parse_sql("SELECT * FROM movies WHERE rating > 7.5;").unwrap();
        assert_eq!(print_sql(&q, Dialect::Generic), "SELECT * FROM movies WHERE rating > 7.5");
        assert_eq!(
            print_sql(&q, Dialect::PostgresLike),
            r#"SELECT * FROM "movies" WHERE "rating" > 7.5"#
        );
        assert_eq!(parse_sql(&print_sql(&q, Dialect::PostgresLike)).unwrap(), q);
    }

    #[test]
    fn aggregation_round_trips() {
        let text = "SELECT genre, COUNT(*) FROM movies GROUP BY genre";
        let q = parse_sql(text).unwrap();
        assert_eq!(print_sql(&q, Dialect::Generic), text);
    }

    #[test]
    fn or_with_join_is_parenthesized() {
        let q = parse_sql(
            "SELECT * FROM a JOIN b ON a.id = b.a_id WHERE a.x = 1 OR (b.y > 2 AND b.z < 3)",
        )
        .unwrap();
        let printed = print_sql(&q, Dialect::Generic);
        assert_eq!(
            printed,
            "SELECT * FROM a, b WHERE a.id = b.a_id AND (a.x = 1 OR (b.y > 2 AND b.z < 3))"
        );
        assert_eq!(parse_sql(&printed).unwrap(), q);
    }

    #[test]
    fn reserved_identifiers_are_quoted() {
        let q = QueryAst::scan("order");
        assert_eq!(print_sql(&q, Dialect::Generic), r#"SELECT * FROM "order""#);
        assert_eq!(parse_sql(&print_sql(&q, Dialect::Generic)).unwrap(), q);
    }
}
