//! Reference interpreter: runs a plan tree with its chosen join algorithms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::labeler::exec::{Mask, Prepared};
use crate::planner::plan::{JoinMethod, Op, PlanNode};
use crate::schema::Database;
use crate::sql::QueryAst;

struct Run<'a> {
    prep: Prepared<'a>,
    rows: Vec<Vec<u32>>,
    positions: HashMap<String, usize>,
}

impl Run<'_> {
    fn eval(&self, node: &PlanNode) -> Result<(Mask, Vec<Vec<u32>>)> {
        match node.op {
            Op::Scan => {
                let b = node.table.as_deref().unwrap_or_default().to_ascii_lowercase();
                let t = *self
                    .positions
                    .get(&b)
                    .ok_or_else(|| Error::InvalidQuery(format!("plan names unknown table `{b}`")))?;
                let width = self.prep.tables.len();
                let tuples = self
                    .prep
                    .filter_base(t, &self.rows[t])
                    .into_iter()
                    .map(|r| {
                        let mut tup = vec![0u32; width];
                        tup[t] = r;
                        tup
                    })
                    .collect();
                Ok((1 << t, tuples))
            }
            Op::Aggregate => self.eval(&node.children[0]),
            Op::Join => {
                let (lm, left) = self.eval(&node.children[0])?;
                let right_node = &node.children[1];
                let (rm, right) = self.eval(right_node)?;
                if rm.count_ones() != 1 {
                    return Err(Error::InvalidQuery("plan is not left-deep".into()));
                }
                let t = rm.trailing_zeros() as usize;
                let keys = self.prep.join_keys(lm, t);
                let (lk, rk): (Vec<_>, Vec<_>) = keys.into_iter().unzip();
                let merge = |a: &Vec<u32>, b: &Vec<u32>| {
                    let mut out = a.clone();
                    out[t] = b[t];
                    out
                };
                let mut joined = Vec::new();
                match node.method {
                    Some(JoinMethod::NestedLoopJoin) => {
                        let right_keys: Vec<_> = right.iter().map(|b| self.prep.key_of(&rk, b)).collect();
                        for a in &left {
                            let ka = self.prep.key_of(&lk, a);
                            for (b, kb) in right.iter().zip(&right_keys) {
                                if *kb == ka {
                                    joined.push(merge(a, b));
                                }
                            }
                        }
                    }
                    Some(JoinMethod::HashJoin) => {
                        let mut table: HashMap<_, Vec<&Vec<u32>>> = HashMap::new();
                        for b in &right {
                            table.entry(self.prep.key_of(&rk, b)).or_default().push(b);
                        }
                        for a in &left {
                            if let Some(bs) = table.get(&self.prep.key_of(&lk, a)) {
                                joined.extend(bs.iter().map(|b| merge(a, b)));
                            }
                        }
                    }
                    Some(JoinMethod::MergeJoin) => {
                        let mut ls: Vec<_> = left.iter().map(|a| (self.prep.key_of(&lk, a), a)).collect();
                        let mut rs: Vec<_> = right.iter().map(|b| (self.prep.key_of(&rk, b), b)).collect();
                        ls.sort_by(|x, y| x.0.cmp(&y.0));
                        rs.sort_by(|x, y| x.0.cmp(&y.0));
                        let (mut i, mut j) = (0, 0);
                        while i < ls.len() && j < rs.len() {
                            match ls[i].0.cmp(&rs[j].0) {
                                std::cmp::Ordering::Less => i += 1,
                                std::cmp::Ordering::Greater => j += 1,
                                std::cmp::Ordering::Equal => {
                                    let j_end = (j..rs.len()).find(|&x| rs[x].0 != ls[i].0).unwrap_or(rs.len());
                                    let key = ls[i].0.clone();
                                    while i < ls.len() && ls[i].0 == key {
                                        for r in &rs[j..j_end] {
                                            joined.push(merge(ls[i].1, r.1));
                                        }
                                        i += 1;
                                    }
                                    j = j_end;
                                }
                            }
                        }
                    }
                    None => return Err(Error::InvalidQuery("join node without method".into())),
                }
                let bound = lm | rm;
                joined.retain(|tup| self.prep.residual_ok(lm, bound, tup));
                Ok((bound, joined))
            }
        }
    }
}

/// Result cardinality of `q` computed by executing `plan` node by node.
pub fn interpret_plan(plan: &PlanNode, q: &QueryAst, db: &Database) -> Result<u64> {
    let prep = Prepared::new(q, db)?;
    let rows = prep.all_rows();
    let positions = q
        .from_tables
        .iter()
        .enumerate()
        .map(|(i, t)| (t.binding().to_ascii_lowercase(), i))
        .collect();
    let run = Run { prep, rows, positions };
    let (mask, tuples) = run.eval(plan)?;
    if mask != run.prep.full_mask() {
        return Err(Error::InvalidQuery("plan does not cover every FROM table".into()));
    }
    Ok(run.prep.output_count(&tuples))
}
