//! Enumerates and costs the left-deep plans of a join query and prints the
//! cheapest few.
//!
//! ```bash
//! cargo run -p forge --example plan_labels -- ["SELECT ..."]
//! ```

use forge::dataset::load_bundled;
use forge::planner::{label_plans, Access, CostParams, Op, PlanNode};
use forge::sql::parse_sql;

const DEFAULT_SQL: &str = "SELECT * FROM persons p, cast_info ci, movies m \
     WHERE p.id = ci.person_id AND ci.movie_id = m.id AND m.rating > 8.0";

fn render(n: &PlanNode) -> String {
    match n.op {
        Op::Scan => {
            let t = n.table.as_deref().unwrap_or("?");
            match (&n.access, &n.index_column) {
                (Some(Access::IndexScan), Some(c)) => format!("{t}[idx {c}]"),
                _ => t.to_string(),
            }
        }
        Op::Join => {
            let kids: Vec<String> = n.children.iter().map(render).collect();
            format!("{:?}({})", n.method.expect("join method"), kids.join(", "))
        }
        Op::Aggregate => format!("Aggregate({})", render(&n.children[0])),
    }
}

fn main() -> anyhow::Result<()> {
    let sql = std::env::args().nth(1).unwrap_or_else(|| DEFAULT_SQL.into());
    let (catalog, db) = load_bundled()?;
    let set = label_plans(&parse_sql(&sql)?, &db, &catalog, &CostParams::default(), 1000, 1)?;
    println!("{} plans (space {}), optimal plan {}", set.plans.len(), set.space_size, set.optimal_plan_id);
    let mut order: Vec<_> = set.plans.iter().collect();
    order.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    for p in order.iter().take(8) {
        println!("{:>4} {:>14.2}  {}", p.plan_id, p.cost, render(&p.plan));
    }
    let worst = order.last().expect("at least one plan");
    println!("...\n{:>4} {:>14.2}  {}", worst.plan_id, worst.cost, render(&worst.plan));
    Ok(())
}
