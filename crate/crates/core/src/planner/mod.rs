//! Left-deep plan enumeration and cost labels.
//!
//! Plans are costed with a System-R style model fed by exact node
//! cardinalities, and the cheapest plan (lowest id on ties) is marked optimal.

mod cost;
mod enumerate;
mod export;
mod interpret;
mod label;
mod plan;

pub use cost::{annotate_costs, cost_plan, CostParams};
pub use enumerate::{enumerate_plans, PlanSpace};
pub use export::{plans_csv, PLAN_HEADER};
pub use interpret::interpret_plan;
pub use label::{argmin, label_plan_workload, label_plans, LabeledPlan, LabeledPlanSet, PlanRun};
pub use plan::{Access, JoinMethod, Op, PlanNode};
