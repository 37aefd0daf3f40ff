//! Shared test helpers, including a brute-force nested-loop evaluator that
//! is deliberately independent of the library's executor.
#![allow(dead_code)]

pub mod arb;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use forge::dataset;
use forge::schema::{Database, SchemaCatalog};
use forge::sql::{AggregateFn, Atom, ColumnName, CompareOp, PredicateExpr, Projection, QueryAst};
use forge::value::Value;

pub fn bundled() -> &'static (SchemaCatalog, Database) {
    static DATA: OnceLock<(SchemaCatalog, Database)> = OnceLock::new();
    DATA.get_or_init(|| dataset::load_bundled().expect("bundled dataset loads"))
}

#[derive(Clone, Debug, PartialEq, PartialOrd)]
enum Scalar {
    Num(f64),
    Str(String),
}

fn scalar(v: &Value) -> Scalar {
    match v {
        Value::Int(i) => Scalar::Num(*i as f64),
        Value::Dec(d) => Scalar::Num(*d),
        Value::Text(s) => Scalar::Str(s.clone()),
    }
}

fn cmp(a: &Scalar, b: &Scalar) -> Option<std::cmp::Ordering> {
    match (a, b) {
        (Scalar::Num(x), Scalar::Num(y)) => x.partial_cmp(y),
        (Scalar::Str(x), Scalar::Str(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn key(s: &Scalar) -> String {
    match s {
        Scalar::Num(x) => format!("n{x}"),
        Scalar::Str(t) => format!("s{t}"),
    }
}

struct Bound {
    binding: String,
    name: String,
    cols: Vec<String>,
    rows: Vec<Vec<Scalar>>,
}

fn bind(q: &QueryAst, db: &Database) -> Vec<Bound> {
    q.from_tables
        .iter()
        .map(|t| {
            let data = db.get(&t.name).expect("table loaded");
            let rows = (0..data.row_count)
                .map(|r| data.columns.iter().map(|c| scalar(&c[r])).collect())
                .collect();
            Bound {
                binding: t.alias.clone().unwrap_or_else(|| t.name.clone()).to_lowercase(),
                name: t.name.to_lowercase(),
                cols: data.column_names.iter().map(|c| c.to_lowercase()).collect(),
                rows,
            }
        })
        .collect()
}

fn locate(tabs: &[Bound], c: &ColumnName) -> (usize, usize) {
    let name = c.name.to_lowercase();
    let candidates: Vec<usize> = match &c.qualifier {
        Some(q) => {
            let q = q.to_lowercase();
            let by_binding: Vec<usize> = (0..tabs.len()).filter(|&i| tabs[i].binding == q).collect();
            if by_binding.is_empty() {
                (0..tabs.len()).filter(|&i| tabs[i].name == q).collect()
            } else {
                by_binding
            }
        }
        None => (0..tabs.len()).collect(),
    };
    let hits: Vec<(usize, usize)> = candidates
        .into_iter()
        .filter_map(|t| tabs[t].cols.iter().position(|x| *x == name).map(|ci| (t, ci)))
        .collect();
    assert_eq!(hits.len(), 1, "column {c} must resolve uniquely");
    hits[0]
}

fn op_holds(op: CompareOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CompareOp::Eq => o == Equal,
        CompareOp::Ne => o != Equal,
        CompareOp::Lt => o == Less,
        CompareOp::Le => o != Greater,
        CompareOp::Gt => o == Greater,
        CompareOp::Ge => o != Less,
    }
}

enum Pred {
    Cmp(usize, usize, CompareOp, Scalar),
    Between(usize, usize, Scalar, Scalar),
    In(usize, usize, BTreeSet<String>),
    ColEq(usize, usize, usize, usize),
    And(Vec<Pred>),
    Or(Vec<Pred>),
}

fn build(p: &PredicateExpr, tabs: &[Bound], db: &Database) -> Pred {
    match p {
        PredicateExpr::And(cs) => Pred::And(cs.iter().map(|c| build(c, tabs, db)).collect()),
        PredicateExpr::Or(cs) => Pred::Or(cs.iter().map(|c| build(c, tabs, db)).collect()),
        PredicateExpr::Atom(a) => match a {
            Atom::Compare { column, op, value } => {
                let (t, c) = locate(tabs, column);
                Pred::Cmp(t, c, *op, scalar(value))
            }
            Atom::Between { column, low, high } => {
                let (t, c) = locate(tabs, column);
                Pred::Between(t, c, scalar(low), scalar(high))
            }
            Atom::InList { column, values } => {
                let (t, c) = locate(tabs, column);
                Pred::In(t, c, values.iter().map(|v| key(&scalar(v))).collect())
            }
            Atom::InSubquery { column, subquery } => {
                let (t, c) = locate(tabs, column);
                Pred::In(t, c, subquery_keys(subquery, db))
            }
        },
    }
}

fn tables_of(p: &Pred, out: &mut BTreeSet<usize>) {
    match p {
        Pred::Cmp(t, ..) | Pred::Between(t, ..) | Pred::In(t, ..) => {
            out.insert(*t);
        }
        Pred::ColEq(a, _, b, _) => {
            out.insert(*a);
            out.insert(*b);
        }
        Pred::And(cs) | Pred::Or(cs) => cs.iter().for_each(|c| tables_of(c, out)),
    }
}

fn eval(p: &Pred, tabs: &[Bound], tuple: &[usize]) -> bool {
    let get = |t: usize, c: usize| &tabs[t].rows[tuple[t]][c];
    match p {
        Pred::Cmp(t, c, op, v) => cmp(get(*t, *c), v).is_some_and(|o| op_holds(*op, o)),
        Pred::Between(t, c, lo, hi) => {
            let x = get(*t, *c);
            cmp(x, lo).is_some_and(|o| o != std::cmp::Ordering::Less)
                && cmp(x, hi).is_some_and(|o| o != std::cmp::Ordering::Greater)
        }
        Pred::In(t, c, set) => set.contains(&key(get(*t, *c))),
        Pred::ColEq(a, ac, b, bc) => cmp(get(*a, *ac), get(*b, *bc)) == Some(std::cmp::Ordering::Equal),
        Pred::And(cs) => cs.iter().all(|c| eval(c, tabs, tuple)),
        Pred::Or(cs) => cs.iter().any(|c| eval(c, tabs, tuple)),
    }
}

/// Every qualifying tuple of the query's FROM/WHERE, as row indices per FROM position.
fn naive_tuples(q: &QueryAst, db: &Database) -> (Vec<Bound>, Vec<Vec<usize>>) {
    let tabs = bind(q, db);
    let n = tabs.len();
    let mut checks: Vec<Pred> = Vec::new();
    for jp in &q.join_predicates {
        let l = locate(&tabs, &jp.left);
        let r = locate(&tabs, &jp.right);
        checks.push(Pred::ColEq(l.0, l.1, r.0, r.1));
    }
    if let Some(w) = &q.where_clause {
        checks.push(build(w, &tabs, db));
    }
    let checks: Vec<(BTreeSet<usize>, Pred)> = checks
        .into_iter()
        .map(|p| {
            let mut s = BTreeSet::new();
            tables_of(&p, &mut s);
            (s, p)
        })
        .collect();

    // Connected nested-loop order starting from the first FROM table.
    let mut order = vec![0usize];
    while order.len() < n {
        let linked = |t: usize| {
            checks.iter().any(|(s, p)| {
                matches!(p, Pred::ColEq(..)) && s.contains(&t) && s.iter().any(|x| order.contains(x))
            })
        };
        let next = (0..n)
            .filter(|t| !order.contains(t))
            .find(|&t| linked(t))
            .unwrap_or_else(|| (0..n).find(|t| !order.contains(t)).unwrap());
        order.push(next);
    }

    fn rec(
        depth: usize,
        order: &[usize],
        tabs: &[Bound],
        checks: &[(BTreeSet<usize>, Pred)],
        tuple: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == order.len() {
            out.push(tuple.clone());
            return;
        }
        let t = order[depth];
        let bound: BTreeSet<usize> = order[..=depth].iter().copied().collect();
        let due: Vec<&Pred> = checks
            .iter()
            .filter(|(s, _)| s.contains(&t) && s.is_subset(&bound))
            .map(|(_, p)| p)
            .collect();
        for r in 0..tabs[t].rows.len() {
            tuple[t] = r;
            if due.iter().all(|p| eval(p, tabs, tuple)) {
                rec(depth + 1, order, tabs, checks, tuple, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut tuple = vec![0usize; n];
    rec(0, &order, &tabs, &checks, &mut tuple, &mut out);
    (tabs, out)
}

fn subquery_keys(q: &QueryAst, db: &Database) -> BTreeSet<String> {
    let (tabs, tuples) = naive_tuples(q, db);
    let item = &q.projections[0].item;
    match item {
        Projection::Column { column } => {
            let (t, c) = locate(&tabs, column);
            tuples.iter().map(|tp| key(&tabs[t].rows[tp[t]][c])).collect()
        }
        Projection::Aggregate { func, arg } => {
            let mut groups: std::collections::BTreeMap<Vec<String>, Vec<&Vec<usize>>> = Default::default();
            for tp in &tuples {
                let k = q
                    .group_by
                    .iter()
                    .map(|g| {
                        let (t, c) = locate(&tabs, g);
                        key(&tabs[t].rows[tp[t]][c])
                    })
                    .collect();
                groups.entry(k).or_default().push(tp);
            }
            if q.group_by.is_empty() && groups.is_empty() {
                groups.insert(vec![], vec![]);
            }
            groups
                .values()
                .filter_map(|rows| match func {
                    AggregateFn::Count => Some(key(&Scalar::Num(rows.len() as f64))),
                    AggregateFn::Sum | AggregateFn::Avg => {
                        if rows.is_empty() {
                            return None;
                        }
                        let (t, c) = locate(&tabs, arg.as_ref().unwrap());
                        let s: f64 = rows
                            .iter()
                            .map(|tp| match &tabs[t].rows[tp[t]][c] {
                                Scalar::Num(x) => *x,
                                Scalar::Str(_) => 0.0,
                            })
                            .sum();
                        let v = if *func == AggregateFn::Avg { s / rows.len() as f64 } else { s };
                        Some(key(&Scalar::Num(v)))
                    }
                })
                .collect()
        }
        Projection::Star => panic!("star subquery"),
    }
}

/// Brute-force result cardinality (group count for aggregations; a scalar
/// aggregate counts as one group when its input is non-empty).
pub fn naive_count(q: &QueryAst, db: &Database) -> u64 {
    let (tabs, tuples) = naive_tuples(q, db);
    if !q.group_by.is_empty() {
        let groups: BTreeSet<Vec<String>> = tuples
            .iter()
            .map(|tp| {
                q.group_by
                    .iter()
                    .map(|g| {
                        let (t, c) = locate(&tabs, g);
                        key(&tabs[t].rows[tp[t]][c])
                    })
                    .collect()
            })
            .collect();
        return groups.len() as u64;
    }
    let n = tuples.len() as u64;
    if q.has_aggregate() {
        n.min(1)
    } else {
        n
    }
}

/// Integer-only tables for synthetic fixtures: `(name, columns, rows)`.
/// The first column is the primary key.
pub fn int_tables(specs: Vec<(&str, Vec<&str>, Vec<Vec<i64>>)>) -> (SchemaCatalog, Database) {
    let tables: Vec<serde_json::Value> = specs
        .iter()
        .map(|(name, cols, _)| {
            serde_json::json!({
                "name": name,
                "primary_key": cols[0],
                "columns": cols.iter().map(|c| serde_json::json!({"name": c, "type": "integer"})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let catalog = SchemaCatalog::from_json_str(
        &serde_json::json!({"tables": tables, "foreign_keys": []}).to_string(),
    )
    .expect("synthetic schema");
    let db = specs
        .into_iter()
        .map(|(name, _, rows)| {
            let rows = rows.into_iter().map(|r| r.into_iter().map(Value::Int).collect()).collect();
            forge::schema::TableData::from_rows(catalog.table(name).unwrap(), rows).unwrap()
        })
        .collect();
    (catalog, db)
}

pub fn q(sql: &str) -> QueryAst {
    forge::sql::parse_sql(sql).unwrap_or_else(|e| panic!("{sql}: {e}"))
}

pub fn bundled_stats() -> &'static forge::schema::StatsMap {
    static STATS: OnceLock<forge::schema::StatsMap> = OnceLock::new();
    STATS.get_or_init(|| {
        forge::schema::compute_database_statistics(
            &bundled().1,
            forge::schema::DEFAULT_SAMPLE_SIZE,
            forge::schema::DEFAULT_BUCKET_COUNT,
            dataset::BUNDLED_SEED,
        )
        .expect("statistics")
    })
}

/// Plan count from first principles: k! orders, 3^(k-1) join methods, and
/// per table one extra access path when any declared index is usable.
pub fn plan_count_oracle(sql: &str) -> u64 {
    let (catalog, _) = bundled();
    let query = q(sql);
    let k = query.from_tables.len() as u64;
    let mut accesses = 1u64;
    for t in &query.from_tables {
        let def = catalog.table(&t.name).unwrap();
        let binding = t.binding().to_lowercase();
        let mentions = |col: &str| {
            let on_table = |c: &forge::sql::ColumnName| {
                c.name.eq_ignore_ascii_case(col)
                    && c.qualifier.as_deref().map_or(query.from_tables.len() == 1, |x| x.eq_ignore_ascii_case(&binding))
            };
            query.join_predicates.iter().any(|j| on_table(&j.left) || on_table(&j.right))
                || query.atoms().iter().any(|a| on_table(a.column()))
        };
        let usable = def.columns.iter().any(|c| def.is_indexed(&c.name) && mentions(&c.name));
        accesses *= if usable { 2 } else { 1 };
    }
    (1..=k).product::<u64>() * 3u64.pow(k as u32 - 1) * accesses
}
