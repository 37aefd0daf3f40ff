//! In-memory query executor: predicate push-down, hash joins, group counting.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::schema::{Database, TableData};
use crate::sql::{
    AggregateFn, Atom, ColumnName, CompareOp, PredicateExpr, Projection, QueryAst, Resolved, Scope,
};
use crate::value::{Value, ValueKey};

/// Bit set over the FROM positions of one query level.
pub(crate) type Mask = u64;

pub(crate) const MAX_TABLES: usize = 63;

enum Cond {
    Cmp {
        col: Resolved,
        op: CompareOp,
        value: Value,
    },
    Between {
        col: Resolved,
        low: Value,
        high: Value,
    },
    In {
        col: Resolved,
        set: HashSet<ValueKey>,
    },
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

impl Cond {
    fn mask(&self) -> Mask {
        match self {
            Cond::Cmp { col, .. } | Cond::Between { col, .. } | Cond::In { col, .. } => {
                1 << col.table_idx
            }
            Cond::And(cs) | Cond::Or(cs) => cs.iter().fold(0, |m, c| m | c.mask()),
        }
    }

    fn eval(&self, tables: &[&TableData], tuple: &[u32]) -> bool {
        let get = |r: &Resolved| &tables[r.table_idx].columns[r.column_idx][tuple[r.table_idx] as usize];
        match self {
            Cond::Cmp { col, op, value } => get(col)
                .compare(value)
                .is_some_and(|o| op.holds(o)),
            Cond::Between { col, low, high } => {
                let v = get(col);
                v.compare(low).is_some_and(|o| o.is_ge()) && v.compare(high).is_some_and(|o| o.is_le())
            }
            Cond::In { col, set } => set.contains(&get(col).key()),
            Cond::And(cs) => cs.iter().all(|c| c.eval(tables, tuple)),
            Cond::Or(cs) => cs.iter().any(|c| c.eval(tables, tuple)),
        }
    }
}

/// A query level compiled against loaded data.
pub(crate) struct Prepared<'a> {
    pub tables: Vec<&'a TableData>,
    conjuncts: Vec<(Mask, Cond)>,
    joins: Vec<(Resolved, Resolved)>,
    group_by: Vec<Resolved>,
    aggregate: bool,
}

fn resolve(scope: &Scope, col: &ColumnName) -> Result<Resolved> {
    scope
        .resolve(col)
        .map_err(|e| Error::InvalidQuery(e.to_string()))
}

impl<'a> Prepared<'a> {
    pub fn new(q: &QueryAst, db: &'a Database) -> Result<Self> {
        Self::with_depth(q, db, 0)
    }

    fn with_depth(q: &QueryAst, db: &'a Database, depth: usize) -> Result<Self> {
        if q.from_tables.is_empty() {
            return Err(Error::InvalidQuery("query has no FROM tables".into()));
        }
        if q.from_tables.len() > MAX_TABLES {
            return Err(Error::InvalidQuery(format!(
                "at most {MAX_TABLES} tables per query level"
            )));
        }
        let tables = q
            .from_tables
            .iter()
            .map(|t| {
                db.get(&t.name)
                    .ok_or_else(|| Error::Execution(format!("table `{}` is not loaded", t.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let scope = Scope::new(db, &q.from_tables).map_err(|e| Error::InvalidQuery(e.to_string()))?;

        let mut conjuncts = Vec::new();
        if let Some(w) = &q.where_clause {
            for c in w.conjuncts() {
                let cond = compile(c, &scope, db, depth)?;
                conjuncts.push((cond.mask(), cond));
            }
        }
        let mut joins = Vec::new();
        for jp in &q.join_predicates {
            let l = resolve(&scope, &jp.left)?;
            let r = resolve(&scope, &jp.right)?;
            joins.push((l, r));
        }
        let group_by = q
            .group_by
            .iter()
            .map(|c| resolve(&scope, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tables,
            conjuncts,
            joins,
            group_by,
            aggregate: q.has_aggregate(),
        })
    }

    pub fn full_mask(&self) -> Mask {
        (1u64 << self.tables.len()) - 1
    }

    pub fn all_rows(&self) -> Vec<Vec<u32>> {
        self.tables
            .iter()
            .map(|t| (0..t.row_count as u32).collect())
            .collect()
    }

    /// Product of base-table row counts; `Overflow` when it does not fit.
    pub fn universe(&self) -> Result<u64> {
        self.tables.iter().try_fold(1u64, |acc, t| {
            acc.checked_mul(t.row_count as u64)
                .ok_or_else(|| Error::Overflow("universe size exceeds u64".into()))
        })
    }

    /// Rows of table `t` among `base` passing its single-table conjuncts and
    /// self-join predicates.
    pub fn filter_base(&self, t: usize, base: &[u32]) -> Vec<u32> {
        let width = self.tables.len();
        let mut tuple = vec![0u32; width];
        let local: Vec<&Cond> = self
            .conjuncts
            .iter()
            .filter(|(m, _)| *m == 1 << t)
            .map(|(_, c)| c)
            .collect();
        let self_joins: Vec<&(Resolved, Resolved)> = self
            .joins
            .iter()
            .filter(|(l, r)| l.table_idx == t && r.table_idx == t)
            .collect();
        base.iter()
            .copied()
            .filter(|&row| {
                tuple[t] = row;
                local.iter().all(|c| c.eval(&self.tables, &tuple))
                    && self_joins.iter().all(|(l, r)| {
                        let tab = self.tables[t];
                        tab.columns[l.column_idx][row as usize]
                            .compare(&tab.columns[r.column_idx][row as usize])
                            .is_some_and(|o| o.is_eq())
                    })
            })
            .collect()
    }

    fn cross_edges(&self) -> impl Iterator<Item = &(Resolved, Resolved)> {
        self.joins.iter().filter(|(l, r)| l.table_idx != r.table_idx)
    }

    /// Splits `mask` into groups that must be materialized together: tables
    /// linked by join predicates or by a conjunct spanning several tables.
    fn groups(&self, mask: Mask) -> Vec<Mask> {
        let n = self.tables.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
            }
        };
        for (l, r) in self.cross_edges() {
            if mask >> l.table_idx & 1 == 1 && mask >> r.table_idx & 1 == 1 {
                union(&mut parent, l.table_idx, r.table_idx);
            }
        }
        for (m, _) in &self.conjuncts {
            if m & mask == *m && m.count_ones() > 1 {
                let first = m.trailing_zeros() as usize;
                for t in 0..n {
                    if m >> t & 1 == 1 {
                        union(&mut parent, first, t);
                    }
                }
            }
        }
        let mut out: Vec<Mask> = Vec::new();
        let mut root_of: HashMap<usize, usize> = HashMap::new();
        for t in 0..n {
            if mask >> t & 1 == 1 {
                let r = find(&mut parent, t);
                let slot = *root_of.entry(r).or_insert_with(|| {
                    out.push(0);
                    out.len() - 1
                });
                out[slot] |= 1 << t;
            }
        }
        out
    }

    /// Materializes the join over the tables in `group`. `filtered[t]` are
    /// the already-filtered base rows of table `t`. Tuples are full width;
    /// positions outside `group` are unspecified.
    fn materialize(&self, group: Mask, filtered: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let width = self.tables.len();
        let members: Vec<usize> = (0..width).filter(|t| group >> t & 1 == 1).collect();
        let start = *members
            .iter()
            .min_by_key(|&&t| (filtered[t].len(), t))
            .expect("non-empty group");
        let mut bound: Mask = 1 << start;
        let mut tuples: Vec<Vec<u32>> = filtered[start]
            .iter()
            .map(|&r| {
                let mut tup = vec![0u32; width];
                tup[start] = r;
                tup
            })
            .collect();

        while bound != group {
            let linked = |t: usize| {
                self.cross_edges().any(|(l, r)| {
                    (l.table_idx == t && bound >> r.table_idx & 1 == 1)
                        || (r.table_idx == t && bound >> l.table_idx & 1 == 1)
                })
            };
            let remaining = members.iter().copied().filter(|t| bound >> t & 1 == 0);
            let next = remaining
                .clone()
                .filter(|&t| linked(t))
                .min_by_key(|&t| (filtered[t].len(), t))
                .or_else(|| remaining.min_by_key(|&t| (filtered[t].len(), t)))
                .expect("group has unbound tables");

            let keys = self.join_keys(bound, next);

            let mut joined = Vec::new();
            if keys.is_empty() {
                for tup in &tuples {
                    for &row in &filtered[next] {
                        let mut t2 = tup.clone();
                        t2[next] = row;
                        joined.push(t2);
                    }
                }
            } else {
                let new_tab = self.tables[next];
                let mut table: HashMap<Vec<ValueKey>, Vec<u32>> = HashMap::new();
                for &row in &filtered[next] {
                    let k: Vec<ValueKey> = keys
                        .iter()
                        .map(|(_, c)| new_tab.columns[c.column_idx][row as usize].key())
                        .collect();
                    table.entry(k).or_default().push(row);
                }
                for tup in &tuples {
                    let k: Vec<ValueKey> = keys
                        .iter()
                        .map(|(b, _)| {
                            self.tables[b.table_idx].columns[b.column_idx][tup[b.table_idx] as usize].key()
                        })
                        .collect();
                    if let Some(rows) = table.get(&k) {
                        for &row in rows {
                            let mut t2 = tup.clone();
                            t2[next] = row;
                            joined.push(t2);
                        }
                    }
                }
            }
            let new_bound = bound | 1 << next;
            joined.retain(|t| self.residual_ok(bound, new_bound, t));
            tuples = joined;
            bound = new_bound;
        }
        tuples
    }

    /// Join cardinality of the tables in `mask` under the join predicates and
    /// conjuncts contained in it. `base` holds candidate rows per table.
    pub fn count_mask(&self, mask: Mask, base: &[Vec<u32>]) -> Result<u64> {
        let filtered = self.filtered(mask, base);
        let mut total: u64 = 1;
        for g in self.groups(mask) {
            let n = if g.count_ones() == 1 {
                filtered[g.trailing_zeros() as usize].len()
            } else {
                self.materialize(g, &filtered).len()
            } as u64;
            total = total
                .checked_mul(n)
                .ok_or_else(|| Error::Overflow("intermediate cardinality exceeds u64".into()))?;
        }
        Ok(total)
    }

    fn filtered(&self, mask: Mask, base: &[Vec<u32>]) -> Vec<Vec<u32>> {
        (0..self.tables.len())
            .map(|t| {
                if mask >> t & 1 == 1 {
                    self.filter_base(t, &base[t])
                } else {
                    Vec::new()
                }
            })
            .collect()
    }

    fn full_tuples(&self, base: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let mask = self.full_mask();
        let filtered = self.filtered(mask, base);
        let groups = self.groups(mask);
        let mut parts: Vec<Vec<Vec<u32>>> = groups
            .iter()
            .map(|&g| self.materialize(g, &filtered))
            .collect();
        let mut acc = parts.remove(0);
        for (g, part) in groups[1..].iter().zip(parts) {
            let mut next = Vec::with_capacity(acc.len() * part.len());
            for a in &acc {
                for p in &part {
                    let mut t = a.clone();
                    for i in 0..t.len() {
                        if g >> i & 1 == 1 {
                            t[i] = p[i];
                        }
                    }
                    next.push(t);
                }
            }
            acc = next;
        }
        acc
    }

    /// Result cardinality: row count, or group count for aggregations.
    pub fn result_count(&self, base: &[Vec<u32>]) -> Result<u64> {
        if !self.group_by.is_empty() {
            let tuples = self.full_tuples(base);
            let groups: HashSet<Vec<ValueKey>> = tuples
                .iter()
                .map(|t| self.group_key(t))
                .collect();
            return Ok(groups.len() as u64);
        }
        let n = self.count_mask(self.full_mask(), base)?;
        Ok(if self.aggregate { n.min(1) } else { n })
    }

    /// (bound-side, `next`-side) column pairs of the join predicates linking
    /// `next` to the tables in `bound`.
    pub fn join_keys(&self, bound: Mask, next: usize) -> Vec<(Resolved, Resolved)> {
        self.cross_edges()
            .filter_map(|(l, r)| {
                if l.table_idx == next && bound >> r.table_idx & 1 == 1 {
                    Some((*r, *l))
                } else if r.table_idx == next && bound >> l.table_idx & 1 == 1 {
                    Some((*l, *r))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn key_of(&self, cols: &[Resolved], tuple: &[u32]) -> Vec<ValueKey> {
        cols.iter().map(|c| self.value(c, tuple).key()).collect()
    }

    /// Whether `tuple` passes the multi-table conjuncts that become fully
    /// bound when moving from `bound` to `new_bound`.
    pub fn residual_ok(&self, bound: Mask, new_bound: Mask, tuple: &[u32]) -> bool {
        self.conjuncts
            .iter()
            .filter(|(m, _)| m & new_bound == *m && m & bound != *m && m.count_ones() > 1)
            .all(|(_, c)| c.eval(&self.tables, tuple))
    }

    /// Output cardinality over fully joined tuples.
    pub fn output_count(&self, tuples: &[Vec<u32>]) -> u64 {
        if !self.group_by.is_empty() {
            let groups: HashSet<Vec<ValueKey>> = tuples.iter().map(|t| self.group_key(t)).collect();
            groups.len() as u64
        } else if self.aggregate {
            (tuples.len() as u64).min(1)
        } else {
            tuples.len() as u64
        }
    }

    fn group_key(&self, tuple: &[u32]) -> Vec<ValueKey> {
        self.group_by
            .iter()
            .map(|g| self.value(g, tuple).key())
            .collect()
    }

    fn value(&self, r: &Resolved, tuple: &[u32]) -> &Value {
        &self.tables[r.table_idx].columns[r.column_idx][tuple[r.table_idx] as usize]
    }
}

fn compile(p: &PredicateExpr, scope: &Scope, db: &Database, depth: usize) -> Result<Cond> {
    Ok(match p {
        PredicateExpr::And(cs) => Cond::And(
            cs.iter()
                .map(|c| compile(c, scope, db, depth))
                .collect::<Result<_>>()?,
        ),
        PredicateExpr::Or(cs) => Cond::Or(
            cs.iter()
                .map(|c| compile(c, scope, db, depth))
                .collect::<Result<_>>()?,
        ),
        PredicateExpr::Atom(a) => match a {
            Atom::Compare { column, op, value } => Cond::Cmp {
                col: resolve(scope, column)?,
                op: *op,
                value: value.clone(),
            },
            Atom::Between { column, low, high } => Cond::Between {
                col: resolve(scope, column)?,
                low: low.clone(),
                high: high.clone(),
            },
            Atom::InList { column, values } => Cond::In {
                col: resolve(scope, column)?,
                set: values.iter().map(Value::key).collect(),
            },
            Atom::InSubquery { column, subquery } => {
                if depth >= 1 {
                    return Err(Error::InvalidQuery("subqueries nest at most one level".into()));
                }
                let col = resolve(scope, column)?;
                let values = subquery_values(subquery, db, depth + 1)?;
                Cond::In {
                    col,
                    set: values.iter().map(Value::key).collect(),
                }
            }
        },
    })
}

/// Evaluates an uncorrelated subquery to the values of its single output column.
fn subquery_values(q: &QueryAst, db: &Database, depth: usize) -> Result<Vec<Value>> {
    let prep = Prepared::with_depth(q, db, depth)?;
    let scope = Scope::new(db, &q.from_tables).map_err(|e| Error::InvalidQuery(e.to_string()))?;
    let [item] = q.projections.as_slice() else {
        return Err(Error::InvalidQuery("subquery must project exactly one column".into()));
    };
    let base = prep.all_rows();
    let tuples = prep.full_tuples(&base);
    match &item.item {
        Projection::Star => Err(Error::InvalidQuery("subquery cannot project *".into())),
        Projection::Column { column } => {
            let r = resolve(&scope, column)?;
            Ok(tuples.iter().map(|t| prep.value(&r, t).clone()).collect())
        }
        Projection::Aggregate { func, arg } => {
            let arg = arg.as_ref().map(|c| resolve(&scope, c)).transpose()?;
            let mut groups: HashMap<Vec<ValueKey>, Vec<&Vec<u32>>> = HashMap::new();
            for t in &tuples {
                groups.entry(prep.group_key(t)).or_default().push(t);
            }
            if prep.group_by.is_empty() && groups.is_empty() {
                groups.insert(Vec::new(), Vec::new());
            }
            Ok(groups
                .values()
                .filter_map(|rows| aggregate(*func, arg.as_ref(), rows, &prep))
                .collect())
        }
    }
}

fn aggregate(func: AggregateFn, arg: Option<&Resolved>, rows: &[&Vec<u32>], prep: &Prepared) -> Option<Value> {
    match func {
        AggregateFn::Count => Some(Value::Int(rows.len() as i64)),
        AggregateFn::Sum | AggregateFn::Avg => {
            let arg = arg?;
            if rows.is_empty() {
                return None;
            }
            let values: Vec<&Value> = rows.iter().map(|t| prep.value(arg, t)).collect();
            let all_int = values.iter().all(|v| matches!(v, Value::Int(_)));
            if func == AggregateFn::Sum && all_int {
                let s = values.iter().try_fold(0i64, |acc, v| match v {
                    Value::Int(i) => acc.checked_add(*i),
                    _ => None,
                })?;
                return Some(Value::Int(s));
            }
            let s: f64 = values.iter().filter_map(|v| v.as_f64()).sum();
            Some(Value::Dec(if func == AggregateFn::Avg {
                s / values.len() as f64
            } else {
                s
            }))
        }
    }
}
