//! Seeded grammar-based provider.
//!
//! It reads the structured request rather than the prompt text and writes
//! SQL by weighted choice over query templates. Constant choice for
//! selectivity-targeted requests follows the statistics slice the prompt
//! would carry: boundaries, a raw sample, or a histogram.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generator::provider::{Provider, ProviderCall};
use crate::generator::request::{GenerationRequest, Intent, PredicateKind, SelectivityLevel, StatsStrategy};
use crate::schema::stats::{find_stats, sample_frequencies};
use crate::schema::{ColumnRef, ColumnStatistics, SchemaCatalog, StatsMap, TableDef};
use crate::seed;
use crate::sql::{
    mutate_query_with, print_sql, AggregateFn, Atom, ColumnName, CompareOp, Dialect, EditKind, JoinPredicate,
    PredicateExpr, QueryAst, QueryCategory, SelectItem, TableRef,
};
use crate::value::{Value, ValueType};

pub struct MockProvider {
    seed: u64,
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Provider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, call: &ProviderCall<'_>) -> Result<String> {
        let rng = seed::rng(seed::indexed_seed(seed::sub_seed(self.seed, "mock"), call.call_index as u64));
        let mut g = Gen {
            catalog: call.catalog,
            stats: call.stats,
            rng,
            boosted: boosted_columns(call.request, call.catalog),
        };
        let mut out = String::new();
        for _ in 0..call.request.n {
            let q = g.statement(call.request, call.category)?;
            out.push_str(&print_sql(&q, Dialect::Generic));
            out.push_str(";\n");
        }
        Ok(out)
    }
}

/// Columns a context text points at: named directly, or through a small
/// vocabulary of money and people terms.
fn boosted_columns(req: &GenerationRequest, catalog: &SchemaCatalog) -> HashSet<(String, String)> {
    let mut out = HashSet::new();
    let Some(text) = req.context_text.as_deref() else {
        return out;
    };
    let words: BTreeSet<String> = text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    const VOCAB: &[(&[&str], &[&str])] = &[
        (
            &["accountant", "accounting", "finance", "financial", "money", "cost", "costs", "profit"],
            &["budget", "revenue", "duration", "rating"],
        ),
        (&["actor", "actors", "actress", "cast", "people"], &["role_id", "nr_order", "gender", "birth_year"]),
        (&["studio", "studios", "distributor", "production"], &["country_code", "company_type"]),
    ];
    let mut wanted: BTreeSet<String> = BTreeSet::new();
    for (keys, cols) in VOCAB {
        if keys.iter().any(|k| words.contains(*k)) {
            wanted.extend(cols.iter().map(|c| c.to_string()));
        }
    }
    for t in &catalog.tables {
        for c in &t.columns {
            let name = c.name.to_lowercase();
            if wanted.contains(&name) || (words.contains(&name) && name != "id") {
                out.insert((t.name.to_lowercase(), name));
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Shape {
    Eq,
    Range,
    Between,
    InList,
    Subquery,
    Mixed,
}

/// Equality first, then ranges, mixed predicates and nested IN queries.
const SHAPES: &[(Shape, f64)] = &[
    (Shape::Eq, 0.34),
    (Shape::Range, 0.24),
    (Shape::Between, 0.10),
    (Shape::InList, 0.08),
    (Shape::Mixed, 0.14),
    (Shape::Subquery, 0.10),
];

fn weighted<T: Copy>(rng: &mut ChaCha8Rng, items: &[(T, f64)]) -> T {
    items
        .choose_weighted(rng, |(_, w)| *w)
        .map(|(t, _)| *t)
        .unwrap_or(items[0].0)
}

fn alias_for(table: &str, taken: &[TableRef]) -> String {
    let base: String = table
        .split('_')
        .filter_map(|p| p.chars().next())
        .collect::<String>()
        .to_lowercase();
    let mut alias = base.clone();
    let mut i = 2;
    while taken.iter().any(|t| t.binding().eq_ignore_ascii_case(&alias)) {
        alias = format!("{base}{i}");
        i += 1;
    }
    alias
}

struct Gen<'a> {
    catalog: &'a SchemaCatalog,
    stats: &'a StatsMap,
    rng: ChaCha8Rng,
    boosted: HashSet<(String, String)>,
}

impl<'a> Gen<'a> {
    fn stats_of(&self, table: &str, column: &str) -> Result<&'a ColumnStatistics> {
        let col = ColumnRef::new(table, column);
        find_stats(self.stats, &col).ok_or_else(|| Error::MissingStatistics(col.to_string()))
    }

    fn is_boosted(&self, table: &str, column: &str) -> bool {
        self.boosted.contains(&(table.to_lowercase(), column.to_lowercase()))
    }

    fn statement(&mut self, req: &GenerationRequest, category: Option<QueryCategory>) -> Result<QueryAst> {
        match req.intent {
            Intent::SelectivityTargeted => self.targeted(req),
            Intent::WorkloadExpansion => self.expansion(req),
            Intent::SchemaAware | Intent::ContextAware => {
                let cat = category.unwrap_or_else(|| {
                    weighted(
                        &mut self.rng,
                        &[
                            (QueryCategory::SimpleSelection, 0.5),
                            (QueryCategory::ComplexJoin, 0.3),
                            (QueryCategory::Aggregation, 0.2),
                        ],
                    )
                });
                match cat {
                    QueryCategory::SimpleSelection => self.simple(),
                    QueryCategory::ComplexJoin => self.join_query(),
                    QueryCategory::Aggregation => self.aggregation(),
                }
            }
        }
    }

    fn pick_table(&mut self, need_edges: bool) -> &'a TableDef {
        let catalog = self.catalog;
        let candidates: Vec<(&TableDef, f64)> = catalog
            .tables
            .iter()
            .filter(|t| !need_edges || catalog.edges_of(&t.name).next().is_some())
            .filter(|t| self.stats_of(&t.name, &t.primary_key).is_ok_and(|s| !s.empty))
            .map(|t| {
                let boost = t.columns.iter().any(|c| self.is_boosted(&t.name, &c.name));
                (t, if boost { 6.0 } else { 1.0 })
            })
            .collect();
        if candidates.is_empty() {
            return &catalog.tables[0];
        }
        candidates
            .choose_weighted(&mut self.rng, |(_, w)| *w)
            .map(|(t, _)| *t)
            .expect("non-empty")
    }

    /// A predicate column of `table`: not the primary key, numeric if asked.
    fn pick_column(&mut self, table: &TableDef, numeric: bool) -> Option<String> {
        let cols: Vec<(String, f64)> = table
            .columns
            .iter()
            .filter(|c| !c.name.eq_ignore_ascii_case(&table.primary_key))
            .filter(|c| !numeric || c.value_type.is_numeric())
            .filter(|c| self.stats_of(&table.name, &c.name).is_ok_and(|s| !s.sample.is_empty()))
            .map(|c| (c.name.clone(), if self.is_boosted(&table.name, &c.name) { 8.0 } else { 1.0 }))
            .collect();
        cols.choose_weighted(&mut self.rng, |(_, w)| *w).ok().map(|(c, _)| c.clone())
    }

    fn sample_value(&mut self, table: &str, column: &str) -> Option<Value> {
        let s = self.stats_of(table, column).ok()?;
        s.sample.choose(&mut self.rng).cloned()
    }

    fn column_name(qualifier: Option<&str>, column: &str) -> ColumnName {
        match qualifier {
            Some(q) => ColumnName::qualified(q, column),
            None => ColumnName::bare(column),
        }
    }

    fn atom(&mut self, table: &TableDef, qualifier: Option<&str>, shape: Shape) -> Option<PredicateExpr> {
        let rng_shape = shape;
        match rng_shape {
            Shape::Eq => {
                let col = self.pick_column(table, false)?;
                let value = self.sample_value(&table.name, &col)?;
                Some(PredicateExpr::Atom(Atom::Compare {
                    column: Self::column_name(qualifier, &col),
                    op: CompareOp::Eq,
                    value,
                }))
            }
            Shape::Range => {
                let col = self.pick_column(table, true)?;
                let value = self.sample_value(&table.name, &col)?;
                let op = *[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge].choose(&mut self.rng)?;
                Some(PredicateExpr::Atom(Atom::Compare {
                    column: Self::column_name(qualifier, &col),
                    op,
                    value,
                }))
            }
            Shape::Between => {
                let col = self.pick_column(table, true)?;
                let a = self.sample_value(&table.name, &col)?;
                let b = self.sample_value(&table.name, &col)?;
                let (low, high) = if a.total_cmp(&b).is_le() { (a, b) } else { (b, a) };
                Some(PredicateExpr::Atom(Atom::Between {
                    column: Self::column_name(qualifier, &col),
                    low,
                    high,
                }))
            }
            Shape::InList => {
                let col = self.pick_column(table, false)?;
                let k = self.rng.gen_range(2..=4);
                let mut values: Vec<Value> = Vec::new();
                for _ in 0..k * 3 {
                    let v = self.sample_value(&table.name, &col)?;
                    if !values.iter().any(|x| x.key() == v.key()) {
                        values.push(v);
                    }
                    if values.len() == k {
                        break;
                    }
                }
                if values.len() < 2 {
                    return self.atom(table, qualifier, Shape::Eq);
                }
                Some(PredicateExpr::Atom(Atom::InList {
                    column: Self::column_name(qualifier, &col),
                    values,
                }))
            }
            Shape::Subquery => {
                let catalog = self.catalog;
                let edges: Vec<_> = catalog.edges_of(&table.name).collect();
                let Some(fk) = edges.choose(&mut self.rng) else {
                    return self.atom(table, qualifier, Shape::Eq);
                };
                let (outer_col, inner) = if fk.from.table.eq_ignore_ascii_case(&table.name) {
                    (&fk.from.column, &fk.to)
                } else {
                    (&fk.to.column, &fk.from)
                };
                let inner_def = catalog.table(&inner.table)?;
                let shape = *[Shape::Eq, Shape::Range, Shape::Between].choose(&mut self.rng)?;
                let cond = self.atom(inner_def, None, shape)?;
                let sub = QueryAst {
                    projections: vec![SelectItem::column(ColumnName::bare(&inner.column))],
                    from_tables: vec![TableRef::new(&inner_def.name)],
                    join_predicates: Vec::new(),
                    where_clause: Some(cond),
                    group_by: Vec::new(),
                };
                Some(PredicateExpr::Atom(Atom::InSubquery {
                    column: Self::column_name(qualifier, outer_col),
                    subquery: Box::new(sub),
                }))
            }
            Shape::Mixed => {
                let a = self.atom(table, qualifier, Shape::Eq)?;
                let second = *[Shape::Eq, Shape::Range, Shape::Between].choose(&mut self.rng)?;
                let b = self.atom(table, qualifier, second)?;
                if self.rng.gen_bool(0.6) {
                    PredicateExpr::or(vec![a, b])
                } else {
                    let c = self.atom(table, qualifier, Shape::Range)?;
                    Some(PredicateExpr::And(vec![PredicateExpr::or(vec![a, b])?, c]))
                }
            }
        }
    }

    fn shape(&mut self) -> Shape {
        weighted(&mut self.rng, SHAPES)
    }

    fn simple(&mut self) -> Result<QueryAst> {
        let table = self.pick_table(false);
        let mut q = QueryAst::scan(&table.name);
        if self.rng.gen_bool(0.3) {
            let cols: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
            let k = self.rng.gen_range(1..=cols.len().min(3));
            q.projections = cols
                .choose_multiple(&mut self.rng, k)
                .map(|c| SelectItem::column(ColumnName::bare(*c)))
                .collect();
        }
        let conjuncts = if self.rng.gen_bool(0.7) { 1 } else { 2 };
        for _ in 0..conjuncts {
            let shape = self.shape();
            if let Some(p) = self.atom(table, None, shape) {
                q.and_where(p);
            }
        }
        Ok(q)
    }

    /// Tables joined along foreign keys, starting from a random table.
    fn join_tables(&mut self, count: usize) -> (Vec<TableRef>, Vec<JoinPredicate>) {
        let catalog = self.catalog;
        let start = self.pick_table(true);
        let mut from = vec![TableRef {
            alias: Some(alias_for(&start.name, &[])),
            name: start.name.clone(),
        }];
        let mut preds = Vec::new();
        while from.len() < count {
            let mut options = Vec::new();
            for (i, t) in from.iter().enumerate() {
                for fk in catalog.edges_of(&t.name) {
                    let (mine, other) = if fk.from.table.eq_ignore_ascii_case(&t.name) {
                        (&fk.from, &fk.to)
                    } else {
                        (&fk.to, &fk.from)
                    };
                    if from.iter().any(|f| f.name.eq_ignore_ascii_case(&other.table)) {
                        continue;
                    }
                    options.push((i, mine.column.clone(), other.table.clone(), other.column.clone()));
                }
            }
            let Some((i, mine, table, col)) = options.choose(&mut self.rng).cloned() else {
                break;
            };
            let alias = alias_for(&table, &from);
            preds.push(JoinPredicate {
                left: ColumnName::qualified(from[i].binding(), mine),
                right: ColumnName::qualified(&alias, col),
            });
            from.push(TableRef {
                name: table,
                alias: Some(alias),
            });
        }
        (from, preds)
    }

    fn join_query(&mut self) -> Result<QueryAst> {
        let count = if self.rng.gen_bool(0.65) { 2 } else { 3 };
        let (from, preds) = self.join_tables(count);
        let mut q = QueryAst {
            projections: vec![SelectItem::star()],
            from_tables: from.clone(),
            join_predicates: preds,
            where_clause: None,
            group_by: Vec::new(),
        };
        let conjuncts = self.rng.gen_range(1..=2);
        for _ in 0..conjuncts {
            let t = from.choose(&mut self.rng).expect("non-empty").clone();
            let def = self.catalog.table(&t.name).expect("catalog table");
            let shape = self.shape();
            if let Some(p) = self.atom(def, Some(t.binding()), shape) {
                q.and_where(p);
            }
        }
        Ok(q)
    }

    fn aggregation(&mut self) -> Result<QueryAst> {
        let (from, preds) = if self.rng.gen_bool(0.6) {
            let t = self.pick_table(false);
            (vec![TableRef::new(&t.name)], Vec::new())
        } else {
            self.join_tables(2)
        };
        let qualify = from.len() > 1;
        let q_of = |t: &TableRef| if qualify { Some(t.binding().to_string()) } else { None };

        let mut group_options = Vec::new();
        let mut numeric_options = Vec::new();
        for t in &from {
            let def = self.catalog.table(&t.name).expect("catalog table");
            for c in &def.columns {
                if c.name.eq_ignore_ascii_case(&def.primary_key) {
                    continue;
                }
                let Ok(s) = self.stats_of(&def.name, &c.name) else {
                    continue;
                };
                if s.distinct_count > 0 && s.distinct_count <= 60 {
                    group_options.push(Self::column_name(q_of(t).as_deref(), &c.name));
                }
                if c.value_type.is_numeric() && s.distinct_count > 60 {
                    numeric_options.push(Self::column_name(q_of(t).as_deref(), &c.name));
                }
            }
        }
        let func = weighted(
            &mut self.rng,
            &[(AggregateFn::Count, 0.5), (AggregateFn::Avg, 0.25), (AggregateFn::Sum, 0.25)],
        );
        let agg = match (func, numeric_options.choose(&mut self.rng)) {
            (AggregateFn::Count, _) | (_, None) => SelectItem::aggregate(AggregateFn::Count, None),
            (f, Some(c)) => SelectItem::aggregate(f, Some(c.clone())),
        };
        let mut q = QueryAst {
            projections: vec![agg],
            from_tables: from.clone(),
            join_predicates: preds,
            where_clause: None,
            group_by: Vec::new(),
        };
        if self.rng.gen_bool(0.8) {
            if let Some(g) = group_options.choose(&mut self.rng) {
                q.projections.insert(0, SelectItem::column(g.clone()));
                q.group_by.push(g.clone());
            }
        }
        if self.rng.gen_bool(0.6) {
            let t = from.choose(&mut self.rng).expect("non-empty").clone();
            let def = self.catalog.table(&t.name).expect("catalog table");
            let shape = *[Shape::Eq, Shape::Range, Shape::Between, Shape::InList]
                .choose(&mut self.rng)
                .expect("non-empty");
            if let Some(p) = self.atom(def, q_of(&t).as_deref(), shape) {
                q.and_where(p);
            }
        }
        Ok(q)
    }

    fn expansion(&mut self, req: &GenerationRequest) -> Result<QueryAst> {
        let seeds = req.seed_workload.as_deref().unwrap_or_default();
        let base = seeds
            .choose(&mut self.rng)
            .ok_or_else(|| Error::Precondition("expansion without seed queries".into()))?
            .clone();
        if self.rng.gen_bool(0.35) {
            // Combine: borrow a condition from another seed over the same tables.
            let same_from: Vec<&QueryAst> = seeds
                .iter()
                .filter(|s| s.from_tables == base.from_tables && *s != &base)
                .collect();
            let donors: Vec<PredicateExpr> = same_from
                .iter()
                .filter_map(|s| s.where_clause.as_ref())
                .flat_map(|w| w.conjuncts().into_iter().cloned())
                .collect();
            if let Some(extra) = donors.choose(&mut self.rng) {
                let mut q = base.clone();
                q.and_where(extra.clone());
                let sub = self.rng.gen::<u64>();
                // vary the borrowed constants so combinations stay fresh
                let varied = mutate_query_with(
                    &q,
                    self.catalog,
                    self.stats,
                    sub,
                    1,
                    &[EditKind::ReplaceConstant, EditKind::ShiftRangeEndpoint],
                );
                return Ok(varied.queries().into_iter().next().unwrap_or(q));
            }
        }
        let sub = self.rng.gen::<u64>();
        let varied = mutate_query_with(
            &base,
            self.catalog,
            self.stats,
            sub,
            1,
            &[EditKind::ReplaceConstant, EditKind::ShiftRangeEndpoint],
        );
        Ok(varied.queries().into_iter().next().unwrap_or(base))
    }

    fn targeted(&mut self, req: &GenerationRequest) -> Result<QueryAst> {
        let target = req
            .selectivity_target
            .as_ref()
            .ok_or_else(|| Error::Precondition("missing selectivity target".into()))?;
        let strategy = req
            .stats_strategy
            .ok_or_else(|| Error::Precondition("missing stats strategy".into()))?;
        let col = target
            .target_columns
            .choose(&mut self.rng)
            .ok_or_else(|| Error::Precondition("selectivity target lists no columns".into()))?;
        let stats = self.stats_of(&col.table, &col.column)?;
        if stats.empty || stats.sample.is_empty() {
            return Err(Error::MissingStatistics(format!("{col} (table has no rows)")));
        }
        if target.predicate_kind == PredicateKind::InequalityOnly && !stats.value_type.is_numeric() {
            return Err(Error::Precondition(format!("inequality predicates need a numeric column, {col} is text")));
        }
        let column = ColumnName::bare(&col.column);
        let selective = target.level == SelectivityLevel::Selective;
        let atom = match (strategy, target.predicate_kind) {
            (StatsStrategy::BoundariesOnly, kind) => self.by_boundaries(column, stats, kind, selective)?,
            (StatsStrategy::SampleOnly, kind) => self.by_sample(column, stats, kind, selective),
            (StatsStrategy::HistogramOnly, kind) => self.by_histogram(column, stats, kind, selective)?,
        };
        let mut q = QueryAst::scan(&col.table);
        q.where_clause = Some(PredicateExpr::Atom(atom));
        Ok(q)
    }

    fn by_boundaries(
        &mut self,
        column: ColumnName,
        s: &ColumnStatistics,
        kind: PredicateKind,
        selective: bool,
    ) -> Result<Atom> {
        let (Some(min), Some(max)) = (s.min_f64(), s.max_f64()) else {
            // Text columns carry no boundaries; fall back to any sampled value.
            let value = s.sample.choose(&mut self.rng).cloned().expect("non-empty sample");
            return Ok(Atom::Compare { column, op: CompareOp::Eq, value });
        };
        let span = max - min;
        let ty = s.value_type;
        Ok(match kind {
            PredicateKind::EqualityOnly => {
                // Without the distribution, a "common" value is guessed from
                // the upper quarter of the range (recent years, high ids).
                let lo = if selective { min } else { max - 0.25 * span };
                let value = make_value(ty, self.rng.gen_range(lo..=max));
                Atom::Compare { column, op: CompareOp::Eq, value }
            }
            PredicateKind::InequalityOnly if selective => {
                let width = self.rng.gen_range(0.0..=0.02) * span;
                let start = self.rng.gen_range(min..=(max - width).max(min));
                let (low, high) = window(ty, start, start + width);
                Atom::Between { column, low, high }
            }
            PredicateKind::InequalityOnly => {
                let cover = self.rng.gen_range(0.5..=0.95) * span;
                match self.rng.gen_range(0..3) {
                    0 => Atom::Compare {
                        column,
                        op: CompareOp::Ge,
                        value: make_value_floor(ty, max - cover),
                    },
                    1 => Atom::Compare {
                        column,
                        op: CompareOp::Le,
                        value: make_value_ceil(ty, min + cover),
                    },
                    _ => {
                        let start = self.rng.gen_range(min..=(max - cover));
                        let (low, high) = window(ty, start, start + cover);
                        Atom::Between { column, low, high }
                    }
                }
            }
        })
    }

    fn by_sample(&mut self, column: ColumnName, s: &ColumnStatistics, kind: PredicateKind, selective: bool) -> Atom {
        match kind {
            PredicateKind::EqualityOnly => {
                // Rare sample values for selective predicates, modal ones otherwise.
                let freq = sample_frequencies(s);
                let value = freq
                    .choose_weighted(&mut self.rng, |(_, c)| {
                        let c = *c as f64;
                        if selective {
                            1.0 / (c * c)
                        } else {
                            c
                        }
                    })
                    .map(|(v, _)| v.clone())
                    .expect("non-empty sample");
                Atom::Compare { column, op: CompareOp::Eq, value }
            }
            PredicateKind::InequalityOnly => {
                let mut sorted = s.sample.clone();
                sorted.sort_by(|a, b| a.total_cmp(b));
                let n = sorted.len();
                if selective {
                    // Stay inside the lowest 2% of the sample.
                    let top = (n / 50).max(1).min(n);
                    let k = self.rng.gen_range(0..top);
                    let value = sorted[k].clone();
                    match self.rng.gen_range(0..3) {
                        0 => Atom::Compare { column, op: CompareOp::Lt, value },
                        1 => Atom::Compare { column, op: CompareOp::Le, value },
                        _ => {
                            let j = self.rng.gen_range(0..top);
                            let (a, b) = (k.min(j), k.max(j));
                            Atom::Between { column, low: sorted[a].clone(), high: sorted[b].clone() }
                        }
                    }
                } else {
                    let k = self.rng.gen_range(0..(n / 2).max(1));
                    if self.rng.gen_bool(0.7) {
                        Atom::Compare { column, op: CompareOp::Ge, value: sorted[k].clone() }
                    } else {
                        Atom::Compare { column, op: CompareOp::Le, value: sorted[n - 1 - k].clone() }
                    }
                }
            }
        }
    }

    fn by_histogram(
        &mut self,
        column: ColumnName,
        s: &ColumnStatistics,
        kind: PredicateKind,
        selective: bool,
    ) -> Result<Atom> {
        let buckets = &s.histogram;
        if buckets.is_empty() {
            return Err(Error::MissingStatistics(format!("{} (no histogram)", s.column)));
        }
        let ty = s.value_type;
        let last = buckets.len() - 1;
        let pick_bucket = |rng: &mut ChaCha8Rng| {
            let idx: Vec<usize> = (0..buckets.len()).collect();
            *idx.choose_weighted(rng, |&i| {
                let f = buckets[i].frequency as f64;
                // Squared so that sparse buckets dominate; a plain inverse
                // still lands often in the dense buckets of skewed columns.
                if selective {
                    1.0 / ((f + 1.0) * (f + 1.0))
                } else {
                    f + 1e-9
                }
            })
            .expect("non-empty histogram")
        };
        Ok(match kind {
            PredicateKind::EqualityOnly => {
                let b = pick_bucket(&mut self.rng);
                let (lo, hi) = (buckets[b].lo, buckets[b].hi);
                let value = match ty {
                    ValueType::Integer => {
                        let first = lo.ceil() as i64;
                        let end = if b == last { hi.floor() as i64 } else { hi.ceil() as i64 - 1 };
                        Value::Int(if end >= first { self.rng.gen_range(first..=end) } else { lo.round() as i64 })
                    }
                    _ => make_value(ty, if hi > lo { self.rng.gen_range(lo..hi) } else { lo }),
                };
                Atom::Compare { column, op: CompareOp::Eq, value }
            }
            PredicateKind::InequalityOnly if selective => {
                let b = pick_bucket(&mut self.rng);
                let (lo, hi) = (buckets[b].lo, buckets[b].hi);
                // A window inside one sparse bucket.
                let (low, high) = match ty {
                    ValueType::Integer => {
                        let first = lo.ceil() as i64;
                        let end = if b == last { hi.floor() as i64 } else { (hi.ceil() as i64 - 1).max(first) };
                        let a = self.rng.gen_range(first..=end);
                        let z = self.rng.gen_range(a..=end);
                        (Value::Int(a), Value::Int(z))
                    }
                    _ => {
                        let a = self.rng.gen_range(lo..=hi);
                        window(ty, a, self.rng.gen_range(a..=hi))
                    }
                };
                Atom::Between { column, low, high }
            }
            PredicateKind::InequalityOnly => {
                // Cut points keeping at least half the rows on the chosen side.
                let total: usize = buckets.iter().map(|b| b.frequency).sum();
                let mut suffix = 0usize;
                let mut lower_cuts = Vec::new();
                for (i, b) in buckets.iter().enumerate().rev() {
                    suffix += b.frequency;
                    if 2 * suffix >= total {
                        lower_cuts.push(i);
                    }
                }
                let mut prefix = 0usize;
                let mut upper_cuts = Vec::new();
                for (i, b) in buckets.iter().enumerate() {
                    prefix += b.frequency;
                    if 2 * prefix >= total {
                        upper_cuts.push(i);
                    }
                }
                // Inside a bucket whose neighbour already qualifies, any point
                // of the bucket still keeps half the rows.
                if upper_cuts.is_empty() || (!lower_cuts.is_empty() && self.rng.gen_bool(0.5)) {
                    let b = *lower_cuts.choose(&mut self.rng).unwrap_or(&0);
                    let (lo, hi) = (buckets[b].lo, buckets[b].hi);
                    let x = if lower_cuts.contains(&(b + 1)) && hi > lo { self.rng.gen_range(lo..hi) } else { lo };
                    Atom::Compare {
                        column,
                        op: CompareOp::Ge,
                        value: make_value_floor(ty, x),
                    }
                } else {
                    let b = *upper_cuts.choose(&mut self.rng).expect("non-empty");
                    let (lo, hi) = (buckets[b].lo, buckets[b].hi);
                    let x = if b > 0 && upper_cuts.contains(&(b - 1)) && hi > lo { self.rng.gen_range(lo..hi) } else { hi };
                    Atom::Compare {
                        column,
                        op: CompareOp::Le,
                        value: make_value_ceil(ty, x),
                    }
                }
            }
        })
    }
}

fn make_value(ty: ValueType, x: f64) -> Value {
    match ty {
        ValueType::Integer => Value::Int(x.round() as i64),
        _ => Value::Dec((x * 100.0).round() / 100.0),
    }
}

fn make_value_floor(ty: ValueType, x: f64) -> Value {
    match ty {
        ValueType::Integer => Value::Int(x.floor() as i64),
        _ => Value::Dec((x * 100.0).floor() / 100.0),
    }
}

fn make_value_ceil(ty: ValueType, x: f64) -> Value {
    match ty {
        ValueType::Integer => Value::Int(x.ceil() as i64),
        _ => Value::Dec((x * 100.0).ceil() / 100.0),
    }
}

/// BETWEEN bounds spanning `[a, b]`; integer bounds stay inside the window.
fn window(ty: ValueType, a: f64, b: f64) -> (Value, Value) {
    match ty {
        ValueType::Integer => {
            let lo = a.ceil() as i64;
            (Value::Int(lo), Value::Int((b.floor() as i64).max(lo)))
        }
        _ => (make_value_ceil(ty, a), make_value_floor(ty, b).max_with(make_value_ceil(ty, a))),
    }
}

trait MaxWith {
    fn max_with(self, other: Value) -> Value;
}

impl MaxWith for Value {
    fn max_with(self, other: Value) -> Value {
        if self.total_cmp(&other).is_lt() {
            other
        } else {
            self
        }
    }
}
