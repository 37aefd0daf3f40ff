//! Normal forms used for deduplication and template matching.
//!
//! Two queries with equal keys are guaranteed to be equivalent, but two
//! equivalent queries may still get different keys (no semantic reasoning).

use crate::sql::ast::*;
use crate::sql::printer::{print_with, Dialect, PrintOptions};

fn opts(mask: bool) -> PrintOptions {
    PrintOptions {
        dialect: Dialect::Generic,
        mask_constants: mask,
        lowercase_identifiers: true,
    }
}

/// Query with AND/OR siblings, FROM tables, join predicates, IN lists and
/// GROUP BY columns in a fixed order.
pub fn normal_form(q: &QueryAst) -> QueryAst {
    normalize(q, false)
}

fn normalize(q: &QueryAst, mask: bool) -> QueryAst {
    let lower = |s: &str| s.to_ascii_lowercase();
    let col_key = |c: &ColumnName| (c.qualifier.as_deref().map(lower), lower(&c.name));

    let mut from = q.from_tables.clone();
    from.sort_by_key(|t| (lower(&t.name), t.alias.as_deref().map(lower)));

    let mut joins: Vec<JoinPredicate> = q
        .join_predicates
        .iter()
        .map(|j| {
            if col_key(&j.left) <= col_key(&j.right) {
                j.clone()
            } else {
                JoinPredicate {
                    left: j.right.clone(),
                    right: j.left.clone(),
                }
            }
        })
        .collect();
    joins.sort_by_key(|j| (col_key(&j.left), col_key(&j.right)));
    joins.dedup();

    let mut group_by = q.group_by.clone();
    group_by.sort_by_key(col_key);

    QueryAst {
        projections: q.projections.clone(),
        from_tables: from,
        join_predicates: joins,
        where_clause: q.where_clause.as_ref().map(|w| normalize_expr(w, mask)),
        group_by,
    }
}

fn normalize_expr(e: &PredicateExpr, mask: bool) -> PredicateExpr {
    match e {
        PredicateExpr::Atom(a) => PredicateExpr::Atom(normalize_atom(a, mask)),
        PredicateExpr::And(children) | PredicateExpr::Or(children) => {
            let mut kids: Vec<(String, PredicateExpr)> = children
                .iter()
                .map(|c| {
                    let n = normalize_expr(c, mask);
                    (expr_key(&n, mask), n)
                })
                .collect();
            kids.sort_by(|a, b| a.0.cmp(&b.0));
            kids.dedup_by(|a, b| a.0 == b.0);
            let kids: Vec<_> = kids.into_iter().map(|(_, n)| n).collect();
            let rebuilt = if matches!(e, PredicateExpr::And(_)) {
                PredicateExpr::and(kids)
            } else {
                PredicateExpr::or(kids)
            };
            rebuilt.expect("non-empty children")
        }
    }
}

fn normalize_atom(a: &Atom, mask: bool) -> Atom {
    match a {
        Atom::InList { column, values } => {
            let mut values = values.clone();
            values.sort_by(|x, y| x.total_cmp(y));
            values.dedup_by(|x, y| x.key() == y.key());
            Atom::InList {
                column: column.clone(),
                values,
            }
        }
        Atom::InSubquery { column, subquery } => Atom::InSubquery {
            column: column.clone(),
            subquery: Box::new(normalize(subquery, mask)),
        },
        other => other.clone(),
    }
}

fn expr_key(e: &PredicateExpr, mask: bool) -> String {
    let mut q = QueryAst::scan("_");
    q.where_clause = Some(e.clone());
    print_with(&q, opts(mask))
}

/// Deduplication key: the printed normal form.
pub fn canonical_key(q: &QueryAst) -> String {
    print_with(&normalize(q, false), opts(false))
}

/// Template skeleton: the normal form with every constant replaced by `?`.
pub fn skeleton_key(q: &QueryAst) -> String {
    print_with(&normalize(q, true), opts(true))
}
