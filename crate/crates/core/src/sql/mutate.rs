//! Single-edit query variations used to scale a workload.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::schema::stats::find_stats;
use crate::schema::{ColumnRef, ColumnStatistics, SchemaCatalog, StatsMap};
use crate::seed;
use crate::sql::ast::*;
use crate::sql::canonical::canonical_key;
use crate::sql::resolve::Scope;
use crate::sql::validate::validate;
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    ReplaceConstant,
    ShiftRangeEndpoint,
    SwapJoinEdge,
    AddConjunct,
    RemoveConjunct,
}

impl EditKind {
    pub const ALL: [EditKind; 5] = [
        EditKind::ReplaceConstant,
        EditKind::ShiftRangeEndpoint,
        EditKind::SwapJoinEdge,
        EditKind::AddConjunct,
        EditKind::RemoveConjunct,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutation {
    pub query: QueryAst,
    pub edit: EditKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MutationOutcome {
    pub variants: Vec<Mutation>,
    /// Set when fewer than the requested number of variants could be produced.
    pub notice: Option<String>,
}

impl MutationOutcome {
    pub fn queries(&self) -> Vec<QueryAst> {
        self.variants.iter().map(|m| m.query.clone()).collect()
    }
}

/// Produces up to `n` distinct valid variants of `q`, each one edit away.
pub fn mutate_query(
    q: &QueryAst,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    seed: u64,
    n: usize,
) -> MutationOutcome {
    mutate_query_with(q, catalog, stats, seed, n, &EditKind::ALL)
}

/// Like [`mutate_query`] but restricted to the given edit kinds.
pub fn mutate_query_with(
    q: &QueryAst,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    seed: u64,
    n: usize,
    kinds: &[EditKind],
) -> MutationOutcome {
    let mut out = MutationOutcome::default();
    if n == 0 {
        return out;
    }
    let ctx = Ctx { catalog, stats };
    let applicable: Vec<EditKind> = kinds
        .iter()
        .copied()
        .filter(|k| ctx.applicable(q, *k))
        .collect();
    if applicable.is_empty() {
        out.notice = Some("no applicable edit for this query".into());
        return out;
    }
    let mut rng = seed::rng(seed);
    let mut seen: HashSet<String> = HashSet::from([canonical_key(q)]);
    let max_attempts = n * 25 + 50;
    for _ in 0..max_attempts {
        if out.variants.len() == n {
            break;
        }
        let kind = *applicable.choose(&mut rng).expect("non-empty");
        let Some(candidate) = ctx.apply(q, kind, &mut rng) else {
            continue;
        };
        if !validate(&candidate, catalog).is_valid() {
            continue;
        }
        if seen.insert(canonical_key(&candidate)) {
            out.variants.push(Mutation {
                query: candidate,
                edit: kind,
            });
        }
    }
    if out.variants.len() < n {
        out.notice = Some(format!(
            "produced {} of {n} requested variants",
            out.variants.len()
        ));
    }
    out
}

struct Ctx<'a> {
    catalog: &'a SchemaCatalog,
    stats: &'a StatsMap,
}

impl<'a> Ctx<'a> {
    fn column_ref(&self, q: &QueryAst, c: &ColumnName) -> Option<ColumnRef> {
        let scope = Scope::new(self.catalog, &q.from_tables).ok()?;
        let r = scope.resolve(c).ok()?;
        Some(ColumnRef::new(scope.table_name(r.table_idx), scope.column_name(r)))
    }

    fn stats_for(&self, q: &QueryAst, c: &ColumnName) -> Option<&'a ColumnStatistics> {
        let r = self.column_ref(q, c)?;
        find_stats(self.stats, &r).filter(|s| !s.sample.is_empty())
    }

    fn constant_atoms(&self, q: &QueryAst) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, a) in q.atoms().into_iter().enumerate() {
            if !matches!(a, Atom::InSubquery { .. }) && self.stats_for(q, a.column()).is_some() {
                out.push(i);
            }
        }
        out
    }

    fn range_atoms(&self, q: &QueryAst) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, a) in q.atoms().into_iter().enumerate() {
            let is_range = match a {
                Atom::Compare { op, value, .. } => op.is_range() && value.as_f64().is_some(),
                Atom::Between { low, .. } => low.as_f64().is_some(),
                _ => false,
            };
            if is_range
                && self
                    .stats_for(q, a.column())
                    .is_some_and(|s| s.min_f64().is_some() && s.max_f64().is_some())
            {
                out.push(i);
            }
        }
        out
    }

    fn addable_columns(&self, q: &QueryAst) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (ti, t) in q.from_tables.iter().enumerate() {
            let Some(def) = self.catalog.table(&t.name) else {
                continue;
            };
            for c in &def.columns {
                if c.name.eq_ignore_ascii_case(&def.primary_key) {
                    continue;
                }
                let r = ColumnRef::new(&def.name, &c.name);
                if find_stats(self.stats, &r).is_some_and(|s| !s.sample.is_empty()) {
                    out.push((ti, c.name.clone()));
                }
            }
        }
        out
    }

    fn applicable(&self, q: &QueryAst, kind: EditKind) -> bool {
        match kind {
            EditKind::ReplaceConstant => !self.constant_atoms(q).is_empty(),
            EditKind::ShiftRangeEndpoint => !self.range_atoms(q).is_empty(),
            EditKind::SwapJoinEdge => !self.join_swaps(q).is_empty(),
            EditKind::AddConjunct => !self.addable_columns(q).is_empty(),
            EditKind::RemoveConjunct => q.where_clause.is_some(),
        }
    }

    fn apply(&self, q: &QueryAst, kind: EditKind, rng: &mut ChaCha8Rng) -> Option<QueryAst> {
        match kind {
            EditKind::ReplaceConstant => self.replace_constant(q, rng),
            EditKind::ShiftRangeEndpoint => self.shift_range(q, rng),
            EditKind::SwapJoinEdge => {
                let swaps = self.join_swaps(q);
                swaps.choose(rng).cloned()
            }
            EditKind::AddConjunct => self.add_conjunct(q, rng),
            EditKind::RemoveConjunct => {
                let mut parts = q.where_clause.clone()?.into_conjuncts();
                let i = rng.gen_range(0..parts.len());
                parts.remove(i);
                let mut out = q.clone();
                out.where_clause = PredicateExpr::and(parts);
                Some(out)
            }
        }
    }

    fn replace_constant(&self, q: &QueryAst, rng: &mut ChaCha8Rng) -> Option<QueryAst> {
        let target = *self.constant_atoms(q).choose(rng)?;
        let atom = q.atoms()[target].clone();
        let stats = self.stats_for(q, atom.column())?;
        let draw = |rng: &mut ChaCha8Rng, avoid: &Value| -> Value {
            let mut v = stats.sample.choose(rng).cloned().expect("non-empty sample");
            for _ in 0..8 {
                if v.key() != avoid.key() {
                    break;
                }
                v = stats.sample.choose(rng).cloned().expect("non-empty sample");
            }
            v
        };
        let replaced = match atom {
            Atom::Compare { column, op, value } => Atom::Compare {
                column,
                op,
                value: draw(rng, &value),
            },
            Atom::Between { column, low, high } => {
                let (mut lo, mut hi) = if rng.gen_bool(0.5) {
                    (draw(rng, &low), high)
                } else {
                    (low, draw(rng, &high))
                };
                if lo.total_cmp(&hi).is_gt() {
                    std::mem::swap(&mut lo, &mut hi);
                }
                Atom::Between { column, low: lo, high: hi }
            }
            Atom::InList { column, mut values } => {
                let i = rng.gen_range(0..values.len());
                values[i] = draw(rng, &values[i]);
                Atom::InList { column, values }
            }
            Atom::InSubquery { .. } => return None,
        };
        Some(replace_atom(q, target, replaced))
    }

    fn shift_range(&self, q: &QueryAst, rng: &mut ChaCha8Rng) -> Option<QueryAst> {
        let target = *self.range_atoms(q).choose(rng)?;
        let atom = q.atoms()[target].clone();
        let stats = self.stats_for(q, atom.column())?;
        let (min, max) = (stats.min_f64()?, stats.max_f64()?);
        let span = (max - min).max(1.0);
        let integral = stats.value_type == ValueType::Integer;
        let shift = |v: &Value, rng: &mut ChaCha8Rng| -> Value {
            let x = v.as_f64().unwrap_or(min);
            let mut delta = span * rng.gen_range(0.05..0.25);
            if rng.gen_bool(0.5) {
                delta = -delta;
            }
            if integral {
                let d = (delta.round() as i64).clamp(i64::MIN / 4, i64::MAX / 4);
                let d = if d == 0 { if delta < 0.0 { -1 } else { 1 } } else { d };
                match v {
                    Value::Int(i) => Value::Int(i.saturating_add(d)),
                    _ => Value::Dec(((x + d as f64) * 100.0).round() / 100.0),
                }
            } else {
                Value::Dec(((x + delta) * 100.0).round() / 100.0)
            }
        };
        let replaced = match atom {
            Atom::Compare { column, op, value } => Atom::Compare {
                column,
                op,
                value: shift(&value, rng),
            },
            Atom::Between { column, low, high } => {
                let (mut lo, mut hi) = if rng.gen_bool(0.5) {
                    (shift(&low, rng), high)
                } else {
                    (low, shift(&high, rng))
                };
                if lo.total_cmp(&hi).is_gt() {
                    std::mem::swap(&mut lo, &mut hi);
                }
                Atom::Between { column, low: lo, high: hi }
            }
            _ => return None,
        };
        Some(replace_atom(q, target, replaced))
    }

    fn add_conjunct(&self, q: &QueryAst, rng: &mut ChaCha8Rng) -> Option<QueryAst> {
        let (ti, col) = self.addable_columns(q).choose(rng).cloned()?;
        let table = &q.from_tables[ti];
        let stats = find_stats(
            self.stats,
            &ColumnRef::new(self.catalog.table(&table.name)?.name.clone(), &col),
        )?;
        let column = if q.from_tables.len() > 1 {
            ColumnName::qualified(table.binding(), col)
        } else {
            ColumnName::bare(col)
        };
        let atom = random_atom(column, stats, rng)?;
        let mut out = q.clone();
        out.and_where(PredicateExpr::Atom(atom));
        Some(out)
    }

    /// All single-edge join swaps that keep the query well-formed.
    fn join_swaps(&self, q: &QueryAst) -> Vec<QueryAst> {
        let Ok(scope) = Scope::new(self.catalog, &q.from_tables) else {
            return Vec::new();
        };
        let mut referenced = vec![0usize; q.from_tables.len()];
        let mut touch = |c: &ColumnName| {
            if let Ok(r) = scope.resolve(c) {
                referenced[r.table_idx] += 1;
            }
        };
        for p in &q.projections {
            match &p.item {
                Projection::Column { column } => touch(column),
                Projection::Aggregate { arg: Some(c), .. } => touch(c),
                _ => {}
            }
        }
        q.group_by.iter().for_each(&mut touch);
        q.atoms().into_iter().for_each(|a| touch(a.column()));
        let mut degree = vec![0usize; q.from_tables.len()];
        let resolved: Vec<_> = q
            .join_predicates
            .iter()
            .map(|j| (scope.resolve(&j.left).ok(), scope.resolve(&j.right).ok()))
            .collect();
        for (l, r) in resolved.iter() {
            if let (Some(l), Some(r)) = (l, r) {
                degree[l.table_idx] += 1;
                degree[r.table_idx] += 1;
            }
        }

        let mut out = Vec::new();
        for (ji, (l, r)) in resolved.iter().enumerate() {
            let (Some(l), Some(r)) = (l, r) else { continue };
            for (leaf, partner) in [(*l, *r), (*r, *l)] {
                if degree[leaf.table_idx] != 1 || referenced[leaf.table_idx] != 0 {
                    continue;
                }
                let partner_table = scope.table_name(partner.table_idx).to_string();
                let partner_binding = q.from_tables[partner.table_idx].binding().to_string();
                let current_leaf = ColumnRef::new(scope.table_name(leaf.table_idx), scope.column_name(leaf));
                let current_partner = ColumnRef::new(&partner_table, scope.column_name(partner));
                for fk in self.catalog.edges_of(&partner_table) {
                    if fk.connects(&current_leaf, &current_partner) {
                        continue;
                    }
                    let (mine, other) = if fk.from.table.eq_ignore_ascii_case(&partner_table) {
                        (&fk.from, &fk.to)
                    } else {
                        (&fk.to, &fk.from)
                    };
                    if other.table.eq_ignore_ascii_case(&partner_table) {
                        continue;
                    }
                    let same_leaf_table = other.table.eq_ignore_ascii_case(&current_leaf.table);
                    let clashes = q.from_tables.iter().enumerate().any(|(i, t)| {
                        i != leaf.table_idx
                            && (t.name.eq_ignore_ascii_case(&other.table)
                                || t.binding().eq_ignore_ascii_case(&other.table))
                    });
                    if clashes {
                        continue;
                    }
                    let mut nq = q.clone();
                    let leaf_ref = if same_leaf_table {
                        q.from_tables[leaf.table_idx].clone()
                    } else {
                        TableRef::new(other.table.clone())
                    };
                    let leaf_binding = leaf_ref.binding().to_string();
                    nq.from_tables[leaf.table_idx] = leaf_ref;
                    nq.join_predicates[ji] = JoinPredicate {
                        left: ColumnName::qualified(partner_binding.clone(), mine.column.clone()),
                        right: ColumnName::qualified(leaf_binding, other.column.clone()),
                    };
                    out.push(nq);
                }
            }
        }
        out
    }
}

/// A random atom over `column` with constants drawn from its sample.
pub(crate) fn random_atom(
    column: ColumnName,
    stats: &ColumnStatistics,
    rng: &mut ChaCha8Rng,
) -> Option<Atom> {
    let v = stats.sample.choose(rng)?.clone();
    if !stats.value_type.is_numeric() {
        return Some(Atom::Compare {
            column,
            op: CompareOp::Eq,
            value: v,
        });
    }
    Some(match rng.gen_range(0..3) {
        0 => Atom::Compare {
            column,
            op: CompareOp::Eq,
            value: v,
        },
        1 => {
            let op = *[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge]
                .choose(rng)
                .expect("non-empty");
            Atom::Compare { column, op, value: v }
        }
        _ => {
            let w = stats.sample.choose(rng)?.clone();
            let (low, high) = if v.total_cmp(&w).is_le() { (v, w) } else { (w, v) };
            Atom::Between { column, low, high }
        }
    })
}

fn replace_atom(q: &QueryAst, target: usize, replacement: Atom) -> QueryAst {
    let mut out = q.clone();
    let mut idx = 0;
    let mut replacement = Some(replacement);
    if let Some(w) = out.where_clause.as_mut() {
        w.visit_atoms_mut(&mut |a| {
            if idx == target {
                if let Some(r) = replacement.take() {
                    *a = r;
                }
            }
            idx += 1;
        });
    }
    out
}
