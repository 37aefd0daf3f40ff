//! Proptest strategies for arbitrary ASTs in the printable shape: AND/OR
//! nodes flat with at least two children, IN-subqueries one level deep.

use forge::sql::{
    AggregateFn, Atom, ColumnName, CompareOp, JoinPredicate, PredicateExpr, Projection, QueryAst, SelectItem,
    TableRef,
};
use forge::value::Value;
use proptest::prelude::*;

const NAMES: &[&str] = &[
    "movies", "title", "rating", "budget", "start_year", "kind_id", "t", "m", "ci", "x1", "_tmp", "order", "Mixed Case",
    "Genre", "select_count",
];

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(NAMES).prop_map(str::to_string)
}

fn column() -> impl Strategy<Value = ColumnName> {
    (prop::option::of(ident()), ident()).prop_map(|(qualifier, name)| ColumnName { qualifier, name })
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-1_000_000_000_000i64..1_000_000_000_000).prop_map(Value::Int),
        (-1.0e9f64..1.0e9).prop_map(Value::Dec),
        "[a-zA-Z0-9 ';,_-]{0,12}".prop_map(Value::Text),
    ]
}

fn op() -> impl Strategy<Value = CompareOp> {
    prop::sample::select(vec![
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ])
}

fn plain_atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        (column(), op(), value()).prop_map(|(column, op, value)| Atom::Compare { column, op, value }),
        (column(), value(), value()).prop_map(|(column, low, high)| Atom::Between { column, low, high }),
        (column(), prop::collection::vec(value(), 1..5)).prop_map(|(column, values)| Atom::InList { column, values }),
    ]
}

fn tree(atom: BoxedStrategy<Atom>) -> impl Strategy<Value = PredicateExpr> {
    atom.prop_map(PredicateExpr::Atom).prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|c| PredicateExpr::and(c).unwrap()),
            prop::collection::vec(inner, 2..4).prop_map(|c| PredicateExpr::or(c).unwrap()),
        ]
    })
}

fn select_item() -> impl Strategy<Value = SelectItem> {
    let func = prop::sample::select(vec![AggregateFn::Count, AggregateFn::Sum, AggregateFn::Avg]);
    let item = prop_oneof![
        column().prop_map(|column| Projection::Column { column }),
        (func, prop::option::of(column())).prop_map(|(func, arg)| {
            // Only COUNT takes `*`.
            let arg = if func == AggregateFn::Count { arg } else { arg.or(Some(ColumnName::bare("x1"))) };
            Projection::Aggregate { func, arg }
        }),
    ];
    (item, prop::option::of(ident())).prop_map(|(item, alias)| SelectItem { item, alias })
}

fn projections() -> impl Strategy<Value = Vec<SelectItem>> {
    prop_oneof![
        Just(vec![SelectItem::star()]),
        prop::collection::vec(select_item(), 1..4),
    ]
}

fn from_list() -> impl Strategy<Value = Vec<TableRef>> {
    prop::collection::vec((ident(), prop::option::of(ident())), 1..4)
        .prop_map(|v| v.into_iter().map(|(name, alias)| TableRef { name, alias }).collect())
}

fn joins() -> impl Strategy<Value = Vec<JoinPredicate>> {
    prop::collection::vec(
        (ident(), ident(), ident(), ident()).prop_map(|(a, b, c, d)| JoinPredicate {
            left: ColumnName::qualified(a, b),
            right: ColumnName::qualified(c, d),
        }),
        0..3,
    )
}

fn subquery() -> impl Strategy<Value = QueryAst> {
    (
        column(),
        from_list(),
        prop::option::of(tree(plain_atom().boxed())),
    )
        .prop_map(|(col, from_tables, where_clause)| QueryAst {
            projections: vec![SelectItem::column(col)],
            from_tables,
            join_predicates: Vec::new(),
            where_clause,
            group_by: Vec::new(),
        })
}

fn outer_atom() -> BoxedStrategy<Atom> {
    prop_oneof![
        4 => plain_atom(),
        1 => (column(), subquery()).prop_map(|(column, q)| Atom::InSubquery { column, subquery: Box::new(q) }),
    ]
    .boxed()
}

/// Arbitrary query ASTs; identifiers need not exist in any catalog.
pub fn query() -> impl Strategy<Value = QueryAst> {
    (
        projections(),
        from_list(),
        joins(),
        prop::option::of(tree(outer_atom())),
        prop::collection::vec(column(), 0..3),
    )
        .prop_map(|(projections, from_tables, join_predicates, where_clause, group_by)| QueryAst {
            projections,
            from_tables,
            join_predicates,
            where_clause,
            group_by,
        })
}
