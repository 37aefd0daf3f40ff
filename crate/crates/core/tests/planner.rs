mod common;

use std::collections::BTreeSet;

use common::{bundled, plan_count_oracle as count_oracle, q};
use forge::labeler::execute_count;
use forge::planner::{
    argmin, cost_plan, enumerate_plans, interpret_plan, label_plans, plans_csv, Access, CostParams, JoinMethod,
    LabeledPlanSet, Op, PlanNode, PlanSpace,
};
use forge::Error;
use proptest::prelude::*;

const TWO: &str = "SELECT * FROM movies m, cast_info ci WHERE m.id = ci.movie_id";
const CHAIN: &str =
    "SELECT * FROM persons p, cast_info ci, movies m WHERE p.id = ci.person_id AND ci.movie_id = m.id AND m.rating > 8.0";

fn leaf(rows: u64, access: Access, index_rows: Option<u64>) -> PlanNode {
    let mut n = PlanNode::scan("t", access, index_rows.map(|_| "id".to_string()));
    n.base_rows = Some(rows);
    n.index_rows = index_rows;
    n.card = Some(index_rows.unwrap_or(rows));
    n
}

#[test]
fn two_table_pk_index_join_has_24_plans() {
    let (catalog, _) = bundled();
    let plans = enumerate_plans(&q(TWO), catalog, 1000, 1).unwrap();
    assert_eq!(plans.len(), 24);
    assert_eq!(count_oracle(TWO), 24);
    let distinct: BTreeSet<String> = plans.iter().map(|p| serde_json::to_string(p).unwrap()).collect();
    assert_eq!(distinct.len(), 24);
}

#[test]
fn three_table_chain_has_432_plans() {
    let (catalog, _) = bundled();
    let plans = enumerate_plans(&q(CHAIN), catalog, 1000, 1).unwrap();
    assert_eq!(count_oracle(CHAIN), 432);
    assert_eq!(plans.len() as u64, count_oracle(CHAIN));
}

#[test]
fn unindexed_single_table_has_one_full_scan() {
    let (catalog, _) = bundled();
    let plans = enumerate_plans(&q("SELECT * FROM movies WHERE rating > 7"), catalog, 10, 1).unwrap();
    assert_eq!(plans.len(), 1);
    assert_eq!(plans[0].access, Some(Access::FullScan));
    let plans = enumerate_plans(&q("SELECT * FROM movies WHERE id = 7"), catalog, 10, 1).unwrap();
    assert_eq!(plans.len(), 2);
}

#[test]
fn truncation_samples_deterministically() {
    let (catalog, _) = bundled();
    let a = enumerate_plans(&q(CHAIN), catalog, 100, 5).unwrap();
    let b = enumerate_plans(&q(CHAIN), catalog, 100, 5).unwrap();
    let c = enumerate_plans(&q(CHAIN), catalog, 100, 6).unwrap();
    assert_eq!(a.len(), 100);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(matches!(enumerate_plans(&q(CHAIN), catalog, 0, 5), Err(Error::Precondition(_))));
}

#[test]
fn cost_formula_examples() {
    let p = CostParams {
        page_size_tuples: 10,
        ..CostParams::default()
    };
    assert_eq!(cost_plan(&leaf(100, Access::FullScan, None), &p).unwrap(), 11.0);

    let d = CostParams::default();
    let idx = cost_plan(&leaf(1000, Access::IndexScan, Some(1)), &d).unwrap();
    assert_eq!(idx, d.index_lookup_cost + d.cpu_tuple_cost);
    assert!(idx < cost_plan(&leaf(1000, Access::FullScan, None), &d).unwrap());

    let join = |m| {
        let mut j = PlanNode::join(m, leaf(1000, Access::FullScan, None), leaf(1000, Access::FullScan, None), vec![]);
        j.card = Some(1000);
        cost_plan(&j, &d).unwrap()
    };
    // NLJ = 20 + 1000 * 20 + 10; hash = 20 + 20 + 12 + 10 + 10
    assert_eq!(join(JoinMethod::NestedLoopJoin), 20.0 + 1000.0 * 20.0 + 10.0);
    assert!((join(JoinMethod::HashJoin) - 72.0).abs() < 1e-9);
    assert!(join(JoinMethod::HashJoin) < join(JoinMethod::NestedLoopJoin));
}

#[test]
fn missing_annotation_is_an_error() {
    let n = PlanNode::scan("t", Access::FullScan, None);
    assert!(matches!(cost_plan(&n, &CostParams::default()), Err(Error::MissingStatistics(_))));
}

#[test]
fn optimal_plan_is_the_exhaustive_minimum() {
    let (catalog, db) = bundled();
    let set = label_plans(&q(TWO), db, catalog, &CostParams::default(), 1000, 1).unwrap();
    assert_eq!(set.plans.len(), 24);
    let min = set.plans.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
    let first_min = set.plans.iter().position(|p| p.cost == min).unwrap();
    assert_eq!(set.optimal_plan_id, first_min);
    assert!(set.plans.iter().enumerate().all(|(i, p)| p.plan_id == i));

    let single = label_plans(&q("SELECT * FROM movies WHERE rating > 9"), db, catalog, &CostParams::default(), 10, 1).unwrap();
    assert_eq!(single.plans.len(), 1);
    assert_eq!(single.optimal_plan_id, 0);
}

#[test]
fn argmin_breaks_ties_by_lowest_id() {
    assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), Some(1));
    assert_eq!(argmin(&[]), None);
}

#[test]
fn doubling_rates_doubles_costs_and_keeps_the_optimum() {
    let (catalog, db) = bundled();
    let base = CostParams::default();
    for sql in [TWO, CHAIN, "SELECT m.genre, COUNT(*) FROM movies m, movie_companies mc WHERE m.id = mc.movie_id GROUP BY m.genre"] {
        let a = label_plans(&q(sql), db, catalog, &base, 1000, 1).unwrap();
        let b = label_plans(&q(sql), db, catalog, &base.scaled(2.0), 1000, 1).unwrap();
        assert_eq!(a.optimal_plan_id, b.optimal_plan_id);
        for (x, y) in a.plans.iter().zip(&b.plans) {
            assert_eq!(2.0 * x.cost, y.cost);
        }
    }
}

#[test]
fn node_cardinalities_are_exact_subquery_counts() {
    let (catalog, db) = bundled();
    let set = label_plans(&q(CHAIN), db, catalog, &CostParams::default(), 1000, 1).unwrap();
    let root = &set.plans[0].plan;
    assert_eq!(root.card, Some(execute_count(&q(CHAIN), db).unwrap()));
    let movies_leaf = root.leaves().into_iter().find(|l| l.table.as_deref() == Some("m")).unwrap();
    assert_eq!(movies_leaf.card, Some(execute_count(&q("SELECT * FROM movies WHERE rating > 8.0"), db).unwrap()));
}

fn rows_of(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes)
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn plan_export_counts_and_recosts() {
    let (catalog, db) = bundled();
    let params = CostParams::default();
    let mut sets: Vec<LabeledPlanSet> = Vec::new();
    for (i, sql) in [TWO, CHAIN, "SELECT * FROM movies WHERE id = 4"].iter().enumerate() {
        let mut s = label_plans(&q(sql), db, catalog, &params, 1000, 1).unwrap();
        s.query_id = format!("q{i}");
        sets.push(s);
    }
    let bytes = plans_csv(Some(1), &sets).unwrap();
    let rows = rows_of(&bytes);
    assert_eq!(rows.len(), sets.iter().map(|s| s.plans.len()).sum::<usize>());
    assert_eq!(rows.iter().filter(|r| &r[4] == "true").count(), sets.len());
    for r in &rows {
        let plan: PlanNode = serde_json::from_str(&r[2]).unwrap();
        let stored: f64 = r[3].parse().unwrap();
        assert_eq!(cost_plan(&plan, &params).unwrap(), stored);
    }

    let empty = plans_csv(None, &[]).unwrap();
    assert_eq!(String::from_utf8(empty).unwrap().trim(), "query_id,plan_id,plan_json,cost,is_optimal");
}

#[test]
fn every_plan_computes_the_same_result() {
    let (catalog, db) = bundled();
    for sql in [
        "SELECT * FROM movies m, cast_info ci WHERE m.id = ci.movie_id AND m.rating > 8.5",
        "SELECT ci.role_id, COUNT(*) FROM persons p, cast_info ci, movies m WHERE p.id = ci.person_id AND ci.movie_id = m.id AND p.birth_year < 1925 AND m.genre = 'Western' GROUP BY ci.role_id",
        "SELECT * FROM title t, kind_type k WHERE t.kind_id = k.id AND (k.kind = 'episode' OR t.start_year < 1910)",
    ] {
        let query = q(sql);
        let expected = execute_count(&query, db).unwrap();
        for p in enumerate_plans(&query, catalog, 1000, 1).unwrap() {
            assert_eq!(interpret_plan(&p, &query, db).unwrap(), expected, "{sql}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn sampled_plans_are_sound(limit in 1usize..500, seed in any::<u64>()) {
        let (catalog, _) = bundled();
        let query = q(CHAIN);
        let space = PlanSpace::new(&query, catalog).unwrap();
        let plans = enumerate_plans(&query, catalog, limit, seed).unwrap();
        prop_assert_eq!(plans.len() as u128, space.size().min(limit as u128));
        let distinct: BTreeSet<String> = plans.iter().map(|p| serde_json::to_string(p).unwrap()).collect();
        prop_assert_eq!(distinct.len(), plans.len());
        for p in &plans {
            let mut leaves: Vec<String> = p.leaves().iter().map(|l| l.table.clone().unwrap()).collect();
            leaves.sort();
            prop_assert_eq!(leaves, vec!["ci".to_string(), "m".to_string(), "p".to_string()]);
            for l in p.leaves() {
                if l.access == Some(Access::IndexScan) {
                    let name = query.from_tables.iter().find(|t| t.binding() == l.table.as_deref().unwrap()).unwrap();
                    prop_assert!(catalog.is_indexed(&name.name, l.index_column.as_deref().unwrap()));
                }
            }
            prop_assert!(p.joins().iter().all(|j| j.op == Op::Join && j.children[1].op == Op::Scan));
        }
    }
}
