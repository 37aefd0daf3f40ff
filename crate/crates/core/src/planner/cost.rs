use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::plan::{Access, JoinMethod, Op, PlanNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub io_page_cost: f64,
    pub cpu_tuple_cost: f64,
    pub hash_build_factor: f64,
    pub sort_factor: f64,
    pub index_lookup_cost: f64,
    pub page_size_tuples: u64,
    pub memory_budget_pages: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            io_page_cost: 1.0,
            cpu_tuple_cost: 0.01,
            hash_build_factor: 1.2,
            sort_factor: 2.0,
            index_lookup_cost: 0.5,
            page_size_tuples: 100,
            memory_budget_pages: 64,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.io_page_cost,
            self.cpu_tuple_cost,
            self.hash_build_factor,
            self.sort_factor,
            self.index_lookup_cost,
        ];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || self.page_size_tuples == 0
            || self.memory_budget_pages == 0
        {
            return Err(Error::Config("cost parameters must all be strictly positive".into()));
        }
        Ok(())
    }

    /// Multiplies the per-unit rates (io, cpu, index lookup) by `f`. Every
    /// cost is linear in these, so all plan costs scale by exactly `f`.
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            io_page_cost: self.io_page_cost * f,
            cpu_tuple_cost: self.cpu_tuple_cost * f,
            index_lookup_cost: self.index_lookup_cost * f,
            ..*self
        }
    }

    fn pages(&self, rows: u64) -> u64 {
        rows.div_ceil(self.page_size_tuples)
    }

    pub fn full_scan(&self, rows: u64) -> f64 {
        self.pages(rows) as f64 * self.io_page_cost + rows as f64 * self.cpu_tuple_cost
    }

    /// The first page is part of the lookup.
    pub fn index_scan(&self, matching: u64) -> f64 {
        self.index_lookup_cost
            + matching as f64 * self.cpu_tuple_cost
            + self.pages(matching).saturating_sub(1) as f64 * self.io_page_cost
    }

    fn sort(&self, rows: u64) -> f64 {
        let n = rows as f64;
        self.sort_factor * n * n.max(2.0).log2() * self.cpu_tuple_cost
    }
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingStatistics(format!("plan node lacks `{what}` annotation")))
}

fn child(node: &PlanNode, i: usize) -> Result<&PlanNode> {
    node.children
        .get(i)
        .ok_or_else(|| Error::InvalidQuery(format!("{:?} node is missing child {i}", node.op)))
}

/// Cost of `plan` under `params`, from its cardinality annotations.
pub fn cost_plan(plan: &PlanNode, params: &CostParams) -> Result<f64> {
    let p = params;
    match plan.op {
        Op::Scan => match need(plan.access, "access")? {
            Access::FullScan => Ok(p.full_scan(need(plan.base_rows, "base_rows")?)),
            Access::IndexScan => Ok(p.index_scan(need(plan.index_rows, "index_rows")?)),
        },
        Op::Aggregate => {
            let input = child(plan, 0)?;
            let in_rows = need(input.card, "card")? as f64;
            let groups = need(plan.card, "card")? as f64;
            Ok(cost_plan(input, p)? + p.hash_build_factor * in_rows * p.cpu_tuple_cost + groups * p.cpu_tuple_cost)
        }
        Op::Join => {
            let (l, r) = (child(plan, 0)?, child(plan, 1)?);
            let (lc, rc) = (need(l.card, "card")?, need(r.card, "card")?);
            let out = need(plan.card, "card")? as f64 * p.cpu_tuple_cost;
            let indexed_on_join = |n: &PlanNode| n.index_key().is_some_and(|k| plan.joins_on(&k));
            Ok(match need(plan.method, "method")? {
                JoinMethod::NestedLoopJoin => {
                    let outer = cost_plan(l, p)?;
                    if indexed_on_join(r) {
                        outer + lc as f64 * (p.index_lookup_cost + p.cpu_tuple_cost) + out
                    } else {
                        outer + lc as f64 * cost_plan(r, p)? + out
                    }
                }
                JoinMethod::HashJoin => {
                    let (build_pages, probe_pages) = (p.pages(rc), p.pages(lc));
                    let spill = if build_pages > p.memory_budget_pages {
                        2.0 * (build_pages + probe_pages) as f64 * p.io_page_cost
                    } else {
                        0.0
                    };
                    cost_plan(l, p)?
                        + cost_plan(r, p)?
                        + p.hash_build_factor * rc as f64 * p.cpu_tuple_cost
                        + lc as f64 * p.cpu_tuple_cost
                        + spill
                        + out
                }
                JoinMethod::MergeJoin => {
                    let sort_l = if indexed_on_join(l) { 0.0 } else { p.sort(lc) };
                    let sort_r = if indexed_on_join(r) { 0.0 } else { p.sort(rc) };
                    cost_plan(l, p)?
                        + cost_plan(r, p)?
                        + sort_l
                        + sort_r
                        + (lc + rc) as f64 * p.cpu_tuple_cost
                        + out
                }
            })
        }
    }
}

/// Fills `cost` on every node of an annotated plan; returns the root cost.
pub fn annotate_costs(plan: &mut PlanNode, params: &CostParams) -> Result<f64> {
    for c in &mut plan.children {
        annotate_costs(c, params)?;
    }
    let c = cost_plan(plan, params)?;
    plan.cost = Some(c);
    Ok(c)
}
