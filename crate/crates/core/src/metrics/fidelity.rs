use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::diversity::{class_counts, has_or, PredicateClass};
use crate::schema::SchemaCatalog;
use crate::sql::{skeleton_key, AggregateFn, ColumnName, Projection, QueryAst, Scope};

/// Join edge as an ordered pair of `table.column` names.
pub type JoinEdge = (String, String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Share of corpus queries whose template also occurs in the reference.
    pub template_overlap: f64,
    pub join_edge_jaccard: f64,
    /// Total variation distance between the predicate-class distributions.
    pub predicate_tv_distance: f64,
    /// Constructs used by only one of the two workloads, prefixed with the side.
    pub unmatched_constructs: Vec<String>,
}

fn resolve_name(scope: &Scope, c: &ColumnName) -> String {
    match scope.resolve(c) {
        Ok(r) => format!("{}.{}", scope.table_name(r.table_idx), scope.column_name(r)).to_lowercase(),
        Err(_) => c.to_string().to_lowercase(),
    }
}

pub fn join_edges(q: &QueryAst, catalog: &SchemaCatalog) -> BTreeSet<JoinEdge> {
    let mut out = BTreeSet::new();
    if let Ok(scope) = Scope::new(catalog, &q.from_tables) {
        for j in &q.join_predicates {
            let a = resolve_name(&scope, &j.left);
            let b = resolve_name(&scope, &j.right);
            out.insert(if a <= b { (a, b) } else { (b, a) });
        }
    }
    for sub in q.subqueries() {
        out.extend(join_edges(sub, catalog));
    }
    out
}

/// Named SQL features a query uses.
fn constructs(q: &QueryAst) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let class = crate::metrics::diversity::predicate_class(q);
    if class != PredicateClass::None {
        out.insert(format!("predicate:{}", class.label()));
    }
    if has_or(q) {
        out.insert("or".into());
    }
    if !q.group_by.is_empty() {
        out.insert("group_by".into());
    }
    for p in &q.projections {
        if let Projection::Aggregate { func, .. } = &p.item {
            out.insert(match func {
                AggregateFn::Count => "aggregate:count".into(),
                AggregateFn::Sum => "aggregate:sum".into(),
                AggregateFn::Avg => "aggregate:avg".into(),
            });
        }
    }
    out.insert(format!("joins:{}", q.from_tables.len().saturating_sub(1)));
    out
}

pub fn fidelity(corpus: &[QueryAst], reference: &[QueryAst], catalog: &SchemaCatalog) -> Result<FidelityReport> {
    if reference.is_empty() {
        return Err(Error::Precondition("fidelity needs a non-empty reference workload".into()));
    }
    if corpus.is_empty() {
        return Err(Error::Precondition("fidelity needs a non-empty corpus".into()));
    }
    let ref_templates: HashSet<String> = reference.iter().map(skeleton_key).collect();
    let matched = corpus.iter().filter(|q| ref_templates.contains(&skeleton_key(q))).count();

    let edges = |w: &[QueryAst]| -> BTreeSet<JoinEdge> { w.iter().flat_map(|q| join_edges(q, catalog)).collect() };
    let (ea, eb) = (edges(corpus), edges(reference));
    let union = ea.union(&eb).count();
    let jaccard = if union == 0 {
        1.0
    } else {
        ea.intersection(&eb).count() as f64 / union as f64
    };

    let dist = |w: &[QueryAst]| -> BTreeMap<PredicateClass, f64> {
        class_counts(w)
            .into_iter()
            .map(|(c, n)| (c, n as f64 / w.len() as f64))
            .collect()
    };
    let (pa, pb) = (dist(corpus), dist(reference));
    let tv = 0.5
        * PredicateClass::ALL
            .iter()
            .map(|c| (pa.get(c).unwrap_or(&0.0) - pb.get(c).unwrap_or(&0.0)).abs())
            .sum::<f64>();

    let features = |w: &[QueryAst]| -> BTreeSet<String> { w.iter().flat_map(constructs).collect() };
    let (fa, fb) = (features(corpus), features(reference));
    let mut unmatched: Vec<String> = fa.difference(&fb).map(|f| format!("corpus only: {f}")).collect();
    unmatched.extend(fb.difference(&fa).map(|f| format!("reference only: {f}")));

    Ok(FidelityReport {
        template_overlap: matched as f64 / corpus.len() as f64,
        join_edge_jaccard: jaccard,
        predicate_tv_distance: tv.clamp(0.0, 1.0),
        unmatched_constructs: unmatched,
    })
}

impl FidelityReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "Template overlap      {:.4}", self.template_overlap);
        let _ = writeln!(s, "Join-edge Jaccard     {:.4}", self.join_edge_jaccard);
        let _ = writeln!(s, "Predicate TV dist.    {:.4}", self.predicate_tv_distance);
        if self.unmatched_constructs.is_empty() {
            s.push_str("Unmatched constructs  none\n");
        } else {
            s.push_str("Unmatched constructs\n");
            for c in &self.unmatched_constructs {
                let _ = writeln!(s, "  {c}");
            }
        }
        s
    }
}
