mod common;

use std::collections::HashSet;

use common::{arb, bundled, bundled_stats, q};
use forge::generator::{GenerationRequest, MockProvider, Provider, ProviderCall};
use forge::sql::{
    canonical_key, mutate_query, mutate_query_with, parse_sql, print_sql, skeleton_key, split_statements, validate,
    Atom, ColumnName, CompareOp, Dialect, EditKind, JoinPredicate, PredicateExpr, Projection, QueryAst, SelectItem,
    SqlError, TableRef, ViolationKind,
};
use forge::value::Value;
use proptest::prelude::*;

#[test]
fn parses_a_single_range_predicate() {
    let ast = q("SELECT * FROM movies WHERE rating > 7.5;");
    assert_eq!(ast.from_tables, vec![TableRef::new("movies")]);
    assert_eq!(
        ast.where_clause,
        Some(PredicateExpr::Atom(Atom::Compare {
            column: ColumnName::bare("rating"),
            op: CompareOp::Gt,
            value: Value::Dec(7.5),
        }))
    );
}

#[test]
fn parses_between_and_comparison_conjunction() {
    let ast = q("SELECT * FROM movies WHERE duration BETWEEN 90 AND 150 AND rating >= 6;");
    let Some(PredicateExpr::And(parts)) = &ast.where_clause else {
        panic!("expected a conjunction");
    };
    assert_eq!(parts.len(), 2);
    assert!(matches!(&parts[0], PredicateExpr::Atom(Atom::Between { low: Value::Int(90), high: Value::Int(150), .. })));
    assert!(matches!(&parts[1], PredicateExpr::Atom(Atom::Compare { op: CompareOp::Ge, value: Value::Int(6), .. })));
}

#[test]
fn order_by_is_reported_as_unsupported() {
    match parse_sql("SELECT x FROM t ORDER BY x") {
        Err(SqlError::Unsupported { construct, offset }) => {
            assert!(construct.to_uppercase().contains("ORDER BY"), "{construct}");
            assert_eq!(offset, 16);
        }
        other => panic!("expected unsupported construct, got {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_a_byte_offset() {
    match parse_sql("SELECT * FROM movies WHERE rating >") {
        Err(SqlError::Syntax { offset, .. }) => assert_eq!(offset, 35),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

#[test]
fn nested_subqueries_beyond_one_level_are_rejected() {
    let text = "SELECT * FROM title WHERE id IN (SELECT movie_id FROM cast_info WHERE person_id IN (SELECT id FROM persons))";
    assert!(parse_sql(text).is_err() || !validate(&q(text), &bundled().0).is_valid());
}

#[test]
fn generic_print_matches_the_source_text() {
    let text = "SELECT * FROM movies WHERE rating > 7.5";
    assert_eq!(print_sql(&q(text), Dialect::Generic), text);
}

#[test]
fn postgres_dialect_differs_only_in_identifier_quoting() {
    let ast = q("SELECT genre, COUNT(*) FROM movies WHERE rating > 7.5 GROUP BY genre");
    let generic = print_sql(&ast, Dialect::Generic);
    let pg = print_sql(&ast, Dialect::PostgresLike);
    assert_ne!(generic, pg);
    assert_eq!(pg.replace('"', ""), generic);
    assert_eq!(parse_sql(&pg).unwrap(), ast);
}

#[test]
fn aggregation_prints_in_group_by_shape() {
    let ast = QueryAst {
        projections: vec![
            SelectItem::column(ColumnName::bare("genre")),
            SelectItem::aggregate(forge::sql::AggregateFn::Count, None),
        ],
        from_tables: vec![TableRef::new("movies")],
        join_predicates: Vec::new(),
        where_clause: None,
        group_by: vec![ColumnName::bare("genre")],
    };
    let text = print_sql(&ast, Dialect::Generic);
    assert_eq!(text, "SELECT genre, COUNT(*) FROM movies GROUP BY genre");
    assert_eq!(parse_sql(&text).unwrap(), ast);
}

#[test]
fn validation_examples() {
    let (catalog, _) = bundled();
    assert!(validate(&q("SELECT * FROM movies WHERE rating > 7.5"), catalog).is_valid());

    let bad_type = validate(&q("SELECT * FROM movies WHERE release_year = 'abc'"), catalog);
    assert!(bad_type.has(ViolationKind::TypeMismatch));
    assert!(!bad_type.is_valid());

    let cross = validate(&q("SELECT * FROM movies, persons WHERE movies.rating > 5"), catalog);
    assert!(cross.has(ViolationKind::DisconnectedJoinGraph));
    assert!(!cross.is_valid());

    let unknown = validate(&q("SELECT * FROM movies WHERE stars > 3"), catalog);
    assert!(unknown.has(ViolationKind::UnknownColumn));
}

#[test]
fn joins_off_the_foreign_keys_are_only_warnings() {
    let (catalog, _) = bundled();
    let report = validate(&q("SELECT * FROM movies m, persons p WHERE m.release_year = p.birth_year"), catalog);
    assert!(report.has(ViolationKind::NonForeignKeyJoin));
    assert!(report.is_valid());
    assert_eq!(report.errors().count(), 0);
    assert!(report.warnings().count() >= 1);
}

#[test]
fn canonical_key_ignores_conjunct_order_and_whitespace() {
    let a = q("SELECT * FROM t WHERE a = 1 AND b = 2");
    let b = q("SELECT   *\nFROM t WHERE b=2 AND a=1");
    assert_eq!(canonical_key(&a), canonical_key(&b));
    assert_ne!(canonical_key(&q("SELECT * FROM t WHERE a = 1")), canonical_key(&q("SELECT * FROM t WHERE a = 2")));
    assert_eq!(
        canonical_key(&q("SELECT * FROM a, b WHERE a.x = b.y")),
        canonical_key(&q("SELECT * FROM b, a WHERE b.y = a.x"))
    );
    assert_eq!(
        skeleton_key(&q("SELECT * FROM t WHERE a = 1")),
        skeleton_key(&q("SELECT * FROM t WHERE a = 99"))
    );
}

/// Structural equality up to AND/OR sibling order, FROM order, join side
/// order and identifier case. Written without the library's normal form.
fn same(a: &QueryAst, b: &QueryAst) -> bool {
    fn low(s: &str) -> String {
        s.to_lowercase()
    }
    fn col(c: &ColumnName) -> (Option<String>, String) {
        (c.qualifier.as_deref().map(low), low(&c.name))
    }
    fn set_eq<T>(x: &[T], y: &[T], eq: impl Fn(&T, &T) -> bool) -> bool {
        x.iter().all(|i| y.iter().any(|j| eq(i, j))) && y.iter().all(|j| x.iter().any(|i| eq(i, j)))
    }
    fn atom_eq(x: &Atom, y: &Atom) -> bool {
        match (x, y) {
            (Atom::Compare { column: c1, op: o1, value: v1 }, Atom::Compare { column: c2, op: o2, value: v2 }) => {
                col(c1) == col(c2) && o1 == o2 && v1 == v2
            }
            (Atom::Between { column: c1, low: l1, high: h1 }, Atom::Between { column: c2, low: l2, high: h2 }) => {
                col(c1) == col(c2) && l1 == l2 && h1 == h2
            }
            (Atom::InList { column: c1, values: v1 }, Atom::InList { column: c2, values: v2 }) => {
                col(c1) == col(c2) && set_eq(v1, v2, |a, b| a == b)
            }
            (Atom::InSubquery { column: c1, subquery: s1 }, Atom::InSubquery { column: c2, subquery: s2 }) => {
                col(c1) == col(c2) && same(s1, s2)
            }
            _ => false,
        }
    }
    fn expr_eq(x: &PredicateExpr, y: &PredicateExpr) -> bool {
        match (x, y) {
            (PredicateExpr::Atom(a), PredicateExpr::Atom(b)) => atom_eq(a, b),
            (PredicateExpr::And(a), PredicateExpr::And(b)) | (PredicateExpr::Or(a), PredicateExpr::Or(b)) => {
                set_eq(a, b, expr_eq)
            }
            _ => false,
        }
    }
    let proj_eq = |x: &SelectItem, y: &SelectItem| {
        x.alias.as_deref().map(low) == y.alias.as_deref().map(low)
            && match (&x.item, &y.item) {
                (Projection::Star, Projection::Star) => true,
                (Projection::Column { column: c1 }, Projection::Column { column: c2 }) => col(c1) == col(c2),
                (Projection::Aggregate { func: f1, arg: a1 }, Projection::Aggregate { func: f2, arg: a2 }) => {
                    f1 == f2 && a1.as_ref().map(col) == a2.as_ref().map(col)
                }
                _ => false,
            }
    };
    let table_eq = |x: &TableRef, y: &TableRef| low(&x.name) == low(&y.name) && x.alias.as_deref().map(low) == y.alias.as_deref().map(low);
    let join_eq = |x: &JoinPredicate, y: &JoinPredicate| {
        (col(&x.left) == col(&y.left) && col(&x.right) == col(&y.right))
            || (col(&x.left) == col(&y.right) && col(&x.right) == col(&y.left))
    };
    a.projections.len() == b.projections.len()
        && a.projections.iter().zip(&b.projections).all(|(x, y)| proj_eq(x, y))
        && a.from_tables.len() == b.from_tables.len()
        && set_eq(&a.from_tables, &b.from_tables, table_eq)
        && set_eq(&a.join_predicates, &b.join_predicates, join_eq)
        && set_eq(&a.group_by, &b.group_by, |x, y| col(x) == col(y))
        && match (&a.where_clause, &b.where_clause) {
            (None, None) => true,
            (Some(x), Some(y)) => expr_eq(x, y),
            _ => false,
        }
}

fn reversed(q: &QueryAst) -> QueryAst {
    fn flip(e: &PredicateExpr) -> PredicateExpr {
        match e {
            PredicateExpr::Atom(a) => PredicateExpr::Atom(a.clone()),
            PredicateExpr::And(c) => PredicateExpr::And(c.iter().rev().map(flip).collect()),
            PredicateExpr::Or(c) => PredicateExpr::Or(c.iter().rev().map(flip).collect()),
        }
    }
    let mut out = q.clone();
    out.from_tables.reverse();
    out.join_predicates.reverse();
    for j in &mut out.join_predicates {
        std::mem::swap(&mut j.left, &mut j.right);
    }
    out.where_clause = q.where_clause.as_ref().map(flip);
    out
}

fn raw_mock_queries(n: usize, seed: u64) -> Vec<QueryAst> {
    let (catalog, _) = bundled();
    let req = GenerationRequest::schema_aware(n);
    let call = ProviderCall {
        prompt: "",
        request: &req,
        catalog,
        stats: bundled_stats(),
        call_index: 0,
        category: None,
    };
    let text = MockProvider::new(seed).complete(&call).unwrap();
    split_statements(&text).iter().map(|s| q(s)).collect()
}

#[test]
fn canonical_dedup_matches_pairwise_structural_comparison() {
    let mut corpus = raw_mock_queries(100, 5);
    let copies: Vec<QueryAst> = corpus.iter().take(30).map(reversed).collect();
    corpus.extend(copies);

    let keyed: HashSet<String> = corpus.iter().map(canonical_key).collect();
    let mut distinct: Vec<&QueryAst> = Vec::new();
    for q in &corpus {
        if !distinct.iter().any(|d| same(d, q)) {
            distinct.push(q);
        }
    }
    assert_eq!(keyed.len(), distinct.len());
    assert!(distinct.len() <= 100);
}

#[test]
fn mutation_of_a_range_query_yields_three_valid_variants() {
    let (catalog, _) = bundled();
    let base = q("SELECT * FROM movies WHERE rating > 7.5");
    let out = mutate_query(&base, catalog, bundled_stats(), 42, 3);
    assert_eq!(out.variants.len(), 3);
    let keys: HashSet<String> = out.variants.iter().map(|m| canonical_key(&m.query)).collect();
    assert_eq!(keys.len(), 3);
    assert!(!keys.contains(&canonical_key(&base)));
    for m in &out.variants {
        assert!(validate(&m.query, catalog).is_valid());
    }
}

#[test]
fn mutation_is_deterministic_per_seed() {
    let (catalog, _) = bundled();
    let base = q("SELECT * FROM movies m, title t WHERE m.title_id = t.id AND m.rating > 7.5");
    let a = mutate_query(&base, catalog, bundled_stats(), 9, 6);
    let b = mutate_query(&base, catalog, bundled_stats(), 9, 6);
    assert_eq!(a, b);
}

#[test]
fn bare_scan_only_admits_added_conjuncts() {
    let (catalog, _) = bundled();
    let out = mutate_query(&q("SELECT * FROM movies"), catalog, bundled_stats(), 3, 5);
    assert!(out.variants.len() <= 5 && !out.variants.is_empty());
    assert!(out.variants.iter().all(|m| m.edit == EditKind::AddConjunct));
}

#[test]
fn no_applicable_edit_returns_a_notice() {
    let (catalog, _) = bundled();
    let out = mutate_query_with(
        &q("SELECT * FROM movies"),
        catalog,
        bundled_stats(),
        3,
        5,
        &[EditKind::ReplaceConstant, EditKind::SwapJoinEdge],
    );
    assert!(out.variants.is_empty());
    assert!(out.notice.is_some());
}

fn conjunct_count(q: &QueryAst) -> usize {
    q.where_clause.as_ref().map_or(0, |w| w.conjuncts().len())
}

/// Checks that `m` is one edit of kind `edit` away from `base`.
fn one_edit(base: &QueryAst, m: &QueryAst, edit: EditKind) -> bool {
    match edit {
        EditKind::ReplaceConstant | EditKind::ShiftRangeEndpoint => {
            skeleton_key(base) == skeleton_key(m) && canonical_key(base) != canonical_key(m)
        }
        EditKind::AddConjunct => {
            conjunct_count(m) == conjunct_count(base) + 1
                && base.join_predicates == m.join_predicates
                && base.from_tables == m.from_tables
        }
        EditKind::RemoveConjunct => {
            conjunct_count(m) + 1 == conjunct_count(base)
                && base.join_predicates == m.join_predicates
                && base.from_tables == m.from_tables
        }
        EditKind::SwapJoinEdge => {
            let differing = base
                .join_predicates
                .iter()
                .filter(|j| !m.join_predicates.contains(j))
                .count();
            differing == 1 && base.join_predicates.len() == m.join_predicates.len() && base.where_clause == m.where_clause
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_asts_parse_back_equal_in_both_dialects(ast in arb::query()) {
        for dialect in [Dialect::Generic, Dialect::PostgresLike] {
            let text = print_sql(&ast, dialect);
            let back = parse_sql(&text);
            prop_assert!(back.is_ok(), "{}: {:?}", text, back);
            prop_assert_eq!(back.unwrap(), ast.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutations_validate_and_differ_by_one_edit(seed in any::<u64>(), pick in 0usize..60) {
        let (catalog, _) = bundled();
        let corpus = raw_mock_queries(60, 77);
        let base = &corpus[pick % corpus.len()];
        let out = mutate_query(base, catalog, bundled_stats(), seed, 3);
        for m in &out.variants {
            let report = validate(&m.query, catalog);
            prop_assert!(report.is_valid(), "{}: {}", print_sql(&m.query, Dialect::Generic), report.summary());
            prop_assert!(one_edit(base, &m.query, m.edit), "{:?}: {} -> {}", m.edit,
                print_sql(base, Dialect::Generic), print_sql(&m.query, Dialect::Generic));
            prop_assert_eq!(parse_sql(&print_sql(&m.query, Dialect::Generic)).unwrap(), m.query.clone());
        }
    }
}
