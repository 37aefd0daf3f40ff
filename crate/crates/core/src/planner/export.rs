use crate::artifact;
use crate::error::Result;
use crate::planner::label::LabeledPlanSet;

pub const PLAN_HEADER: [&str; 5] = ["query_id", "plan_id", "plan_json", "cost", "is_optimal"];

/// One row per (query, plan).
pub fn plans_csv(seed: Option<u64>, sets: &[LabeledPlanSet]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for s in sets {
        for p in &s.plans {
            rows.push([
                s.query_id.clone(),
                p.plan_id.to_string(),
                serde_json::to_string(&p.plan)?,
                format!("{:?}", p.cost),
                (p.plan_id == s.optimal_plan_id).to_string(),
            ]);
        }
    }
    artifact::csv_bytes(seed, &PLAN_HEADER, rows)
}
