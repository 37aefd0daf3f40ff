use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::exec::{Mask, Prepared};
use crate::labeler::{execute_count, LabelFailure};
use crate::planner::cost::{annotate_costs, CostParams};
use crate::planner::enumerate::PlanSpace;
use crate::planner::plan::{Access, Op, PlanNode};
use crate::schema::{Database, SchemaCatalog};
use crate::seed;
use crate::sql::{Atom, CompareOp, PredicateExpr, QueryAst, Scope, SelectItem};
use crate::workload::WorkloadQuery;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPlan {
    pub plan_id: usize,
    pub plan: PlanNode,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPlanSet {
    pub query_id: String,
    pub query: QueryAst,
    pub plans: Vec<LabeledPlan>,
    pub optimal_plan_id: usize,
    /// Size of the full plan space before truncation.
    pub space_size: u128,
}

impl LabeledPlanSet {
    pub fn optimal(&self) -> &LabeledPlan {
        &self.plans[self.optimal_plan_id]
    }
}

/// Lowest cost, ties to the lowest id.
pub fn argmin(costs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in costs.iter().enumerate() {
        if best.map_or(true, |b| *c < costs[b]) {
            best = Some(i);
        }
    }
    best
}

/// Exact cardinalities for plan nodes of one query, memoized per table subset.
pub(crate) struct Cardinalities<'a> {
    q: &'a QueryAst,
    db: &'a Database,
    prep: Prepared<'a>,
    rows: Vec<Vec<u32>>,
    positions: HashMap<String, usize>,
    by_mask: HashMap<Mask, u64>,
    by_index: HashMap<(usize, String), u64>,
    result: Option<u64>,
}

impl<'a> Cardinalities<'a> {
    pub fn new(q: &'a QueryAst, db: &'a Database) -> Result<Self> {
        let prep = Prepared::new(q, db)?;
        prep.universe()?;
        let rows = prep.all_rows();
        let positions = q
            .from_tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.binding().to_ascii_lowercase(), i))
            .collect();
        Ok(Self {
            q,
            db,
            prep,
            rows,
            positions,
            by_mask: HashMap::new(),
            by_index: HashMap::new(),
            result: None,
        })
    }

    fn position(&self, binding: &str) -> Result<usize> {
        self.positions
            .get(&binding.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| Error::InvalidQuery(format!("plan names unknown table `{binding}`")))
    }

    fn mask_count(&mut self, mask: Mask) -> Result<u64> {
        if let Some(c) = self.by_mask.get(&mask) {
            return Ok(*c);
        }
        let c = self.prep.count_mask(mask, &self.rows)?;
        self.by_mask.insert(mask, c);
        Ok(c)
    }

    /// Rows of table `t` matched by the sargable top-level atoms on `column`.
    fn index_rows(&mut self, t: usize, column: &str) -> Result<u64> {
        let key = (t, column.to_ascii_lowercase());
        if let Some(c) = self.by_index.get(&key) {
            return Ok(*c);
        }
        let scope = Scope::new(self.db, &self.q.from_tables).map_err(|e| Error::InvalidQuery(e.to_string()))?;
        let mut atoms = Vec::new();
        if let Some(w) = &self.q.where_clause {
            for c in w.conjuncts() {
                if let PredicateExpr::Atom(a) = c {
                    let on_index = scope.resolve(a.column()).is_ok_and(|r| {
                        r.table_idx == t && scope.column_name(r).eq_ignore_ascii_case(column)
                    });
                    let sargable = !matches!(a, Atom::Compare { op: CompareOp::Ne, .. } | Atom::InSubquery { .. });
                    if on_index && sargable {
                        atoms.push(PredicateExpr::Atom(a.clone()));
                    }
                }
            }
        }
        let n = if atoms.is_empty() {
            self.prep.tables[t].row_count as u64
        } else {
            let sub = QueryAst {
                projections: vec![SelectItem::star()],
                from_tables: vec![self.q.from_tables[t].clone()],
                join_predicates: Vec::new(),
                where_clause: PredicateExpr::and(atoms),
                group_by: Vec::new(),
            };
            execute_count(&sub, self.db)?
        };
        self.by_index.insert(key, n);
        Ok(n)
    }

    /// Fills `card`, `base_rows` and `index_rows`; returns the node's table mask.
    pub fn annotate(&mut self, node: &mut PlanNode) -> Result<Mask> {
        match node.op {
            Op::Scan => {
                let binding = node
                    .table
                    .clone()
                    .ok_or_else(|| Error::InvalidQuery("scan without table".into()))?;
                let t = self.position(&binding)?;
                let mask = 1 << t;
                node.base_rows = Some(self.prep.tables[t].row_count as u64);
                node.card = Some(self.mask_count(mask)?);
                node.index_rows = match (node.access, &node.index_column) {
                    (Some(Access::IndexScan), Some(c)) => Some(self.index_rows(t, &c.clone())?),
                    _ => None,
                };
                Ok(mask)
            }
            Op::Join => {
                let mut mask = 0;
                for c in &mut node.children {
                    mask |= self.annotate(c)?;
                }
                node.card = Some(self.mask_count(mask)?);
                Ok(mask)
            }
            Op::Aggregate => {
                let mut mask = 0;
                for c in &mut node.children {
                    mask |= self.annotate(c)?;
                }
                let card = match self.result {
                    Some(c) => c,
                    None => {
                        let c = self.prep.result_count(&self.rows)?;
                        self.result = Some(c);
                        c
                    }
                };
                node.card = Some(card);
                Ok(mask)
            }
        }
    }
}

/// Enumerates, annotates with exact cardinalities and costs the plans of `q`.
pub fn label_plans(
    q: &QueryAst,
    db: &Database,
    catalog: &SchemaCatalog,
    params: &CostParams,
    limit: usize,
    seed: u64,
) -> Result<LabeledPlanSet> {
    params.validate()?;
    let space = PlanSpace::new(q, catalog)?;
    let picks = space.select(limit, seed)?;
    let mut cards = Cardinalities::new(q, db)?;
    let mut plans = Vec::with_capacity(picks.len());
    for (plan_id, idx) in picks.into_iter().enumerate() {
        let mut plan = space.plan(idx);
        cards.annotate(&mut plan)?;
        let cost = annotate_costs(&mut plan, params)?;
        plans.push(LabeledPlan { plan_id, plan, cost });
    }
    let costs: Vec<f64> = plans.iter().map(|p| p.cost).collect();
    let optimal_plan_id = argmin(&costs).expect("plan space is never empty");
    Ok(LabeledPlanSet {
        query_id: String::new(),
        query: q.clone(),
        plans,
        optimal_plan_id,
        space_size: space.size(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct PlanRun {
    pub sets: Vec<LabeledPlanSet>,
    pub failures: Vec<LabelFailure>,
}

/// Plan-labels a workload; failures are isolated per query and output order
/// follows input order.
pub fn label_plan_workload(
    queries: &[WorkloadQuery],
    db: &Database,
    catalog: &SchemaCatalog,
    params: &CostParams,
    limit: usize,
    seed: u64,
    jobs: Option<usize>,
) -> PlanRun {
    let work = || {
        queries
            .par_iter()
            .map(|wq| {
                label_plans(&wq.ast, db, catalog, params, limit, seed::sub_seed(seed, &wq.id))
                    .map(|mut s| {
                        s.query_id = wq.id.clone();
                        s
                    })
                    .map_err(|e| LabelFailure {
                        query_id: wq.id.clone(),
                        sql: wq.sql.clone(),
                        error: e.to_string(),
                    })
            })
            .collect::<Vec<_>>()
    };
    let results = match jobs.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()) {
        Some(pool) => pool.install(work),
        None => work(),
    };
    let mut run = PlanRun::default();
    for r in results {
        match r {
            Ok(s) => run.sets.push(s),
            Err(f) => run.failures.push(f),
        }
    }
    run
}
