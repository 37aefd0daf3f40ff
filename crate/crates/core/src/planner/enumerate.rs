use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::planner::plan::{Access, JoinMethod, PlanNode};
use crate::schema::SchemaCatalog;
use crate::seed;
use crate::sql::{Atom, CompareOp, PredicateExpr, QueryAst, Scope};

/// The left-deep plan space of one query: every join order, every join-method
/// assignment and every access-method assignment.
///
/// Each table offers a full scan, plus an index scan when one of its indexed
/// columns is usable: the first indexed column (primary key first) carrying a
/// sargable selection conjunct, else the first one appearing in a join
/// predicate.
#[derive(Debug, Clone)]
pub struct PlanSpace {
    pub(crate) bindings: Vec<String>,
    pub(crate) access: Vec<Vec<(Access, Option<String>)>>,
    /// (table, column, table, column) per join predicate.
    pub(crate) edges: Vec<(usize, String, usize, String)>,
    pub(crate) aggregate: bool,
}

fn sargable(a: &Atom) -> bool {
    match a {
        Atom::Compare { op, .. } => *op != CompareOp::Ne,
        Atom::Between { .. } | Atom::InList { .. } => true,
        Atom::InSubquery { .. } => false,
    }
}

impl PlanSpace {
    pub fn new(q: &QueryAst, catalog: &SchemaCatalog) -> Result<Self> {
        if q.from_tables.is_empty() {
            return Err(Error::InvalidQuery("query has no FROM tables".into()));
        }
        let scope = Scope::new(catalog, &q.from_tables).map_err(|e| Error::InvalidQuery(e.to_string()))?;
        let resolve = |c| {
            scope
                .resolve(c)
                .map(|r| (r.table_idx, scope.column_name(r).to_string()))
                .map_err(|e| Error::InvalidQuery(e.to_string()))
        };
        let k = q.from_tables.len();
        let mut selected: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
        if let Some(w) = &q.where_clause {
            for c in w.conjuncts() {
                if let PredicateExpr::Atom(a) = c {
                    if sargable(a) {
                        let (t, col) = resolve(a.column())?;
                        selected[t].insert(col.to_ascii_lowercase());
                    }
                }
            }
        }
        let mut edges = Vec::new();
        let mut joined: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
        for jp in &q.join_predicates {
            let (lt, lc) = resolve(&jp.left)?;
            let (rt, rc) = resolve(&jp.right)?;
            joined[lt].insert(lc.to_ascii_lowercase());
            joined[rt].insert(rc.to_ascii_lowercase());
            edges.push((lt, lc, rt, rc));
        }
        let access = q
            .from_tables
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let def = catalog.table(&t.name).expect("resolved above");
                let indexed = def.indexed_columns();
                let pick = |set: &BTreeSet<String>| {
                    indexed
                        .iter()
                        .find(|c| set.contains(&c.to_ascii_lowercase()))
                        .map(|c| c.to_string())
                };
                let mut opts = vec![(Access::FullScan, None)];
                if let Some(c) = pick(&selected[i]).or_else(|| pick(&joined[i])) {
                    opts.push((Access::IndexScan, Some(c)));
                }
                opts
            })
            .collect();
        Ok(Self {
            bindings: q.from_tables.iter().map(|t| t.binding().to_ascii_lowercase()).collect(),
            access,
            edges,
            aggregate: q.has_aggregate() || !q.group_by.is_empty(),
        })
    }

    fn tables(&self) -> usize {
        self.bindings.len()
    }

    fn method_combos(&self) -> u128 {
        3u128.pow(self.tables() as u32 - 1)
    }

    fn access_combos(&self) -> u128 {
        self.access.iter().map(|a| a.len() as u128).product()
    }

    /// Number of plans in the space.
    pub fn size(&self) -> u128 {
        let orders: u128 = (1..=self.tables() as u128).product();
        orders * self.method_combos() * self.access_combos()
    }

    /// Decodes plan number `index` (mixed radix: order, methods, accesses).
    pub fn plan(&self, index: u128) -> PlanNode {
        let k = self.tables();
        let mut idx = index;
        let mut choice = Vec::with_capacity(k);
        for opts in &self.access {
            let n = opts.len() as u128;
            choice.push(opts[(idx % n) as usize].clone());
            idx /= n;
        }
        let mut methods = Vec::with_capacity(k.saturating_sub(1));
        for _ in 1..k {
            methods.push(JoinMethod::ALL[(idx % 3) as usize]);
            idx /= 3;
        }
        // Lehmer code of the join order.
        let mut pool: Vec<usize> = (0..k).collect();
        let mut order = Vec::with_capacity(k);
        for i in (1..=k).rev() {
            let f: u128 = (1..i as u128).product();
            let pos = (idx / f) as usize;
            idx %= f;
            order.push(pool.remove(pos));
        }

        let leaf = |t: usize| {
            let (access, col) = choice[t].clone();
            PlanNode::scan(self.bindings[t].clone(), access, col)
        };
        let mut tree = leaf(order[0]);
        let mut bound = vec![order[0]];
        for (step, &t) in order[1..].iter().enumerate() {
            let preds = self
                .edges
                .iter()
                .filter(|(lt, _, rt, _)| {
                    (*lt == t && bound.contains(rt)) || (*rt == t && bound.contains(lt))
                })
                .map(|(lt, lc, rt, rc)| {
                    format!("{}.{} = {}.{}", self.bindings[*lt], lc, self.bindings[*rt], rc)
                        .to_ascii_lowercase()
                })
                .collect();
            tree = PlanNode::join(methods[step], tree, leaf(t), preds);
            bound.push(t);
        }
        if self.aggregate {
            tree = PlanNode::aggregate(tree);
        }
        tree
    }

    /// Plan numbers kept under `limit`: all of them, or a seeded uniform
    /// sample without replacement, in ascending order.
    pub fn select(&self, limit: usize, seed: u64) -> Result<Vec<u128>> {
        if limit == 0 {
            return Err(Error::Precondition("plan limit must be at least 1".into()));
        }
        let total = self.size();
        if total <= limit as u128 {
            return Ok((0..total).collect());
        }
        let mut rng = seed::rng(seed);
        let mut picked: Vec<u128> = if total <= usize::MAX as u128 {
            rand::seq::index::sample(&mut rng, total as usize, limit)
                .into_iter()
                .map(|i| i as u128)
                .collect()
        } else {
            let mut set = BTreeSet::new();
            while set.len() < limit {
                set.insert(rng.gen_range(0..total));
            }
            set.into_iter().collect()
        };
        picked.sort_unstable();
        Ok(picked)
    }
}

/// Candidate left-deep plans for `q`, truncated to `limit` by seeded sampling.
pub fn enumerate_plans(q: &QueryAst, catalog: &SchemaCatalog, limit: usize, seed: u64) -> Result<Vec<PlanNode>> {
    let space = PlanSpace::new(q, catalog)?;
    Ok(space.select(limit, seed)?.into_iter().map(|i| space.plan(i)).collect())
}
