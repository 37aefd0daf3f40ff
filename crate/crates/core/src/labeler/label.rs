use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::exec::Prepared;
use crate::schema::Database;
use crate::seed;
use crate::sql::{print_sql, Dialect, QueryAst, QueryCategory};
use crate::workload::WorkloadQuery;

/// Sampled estimates resting on fewer qualifying sample rows than this are
/// flagged low-confidence.
pub const LOW_CONFIDENCE_MIN_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LabelMode {
    Exact,
    Sampled { fraction: f64 },
}

impl Default for LabelMode {
    fn default() -> Self {
        LabelMode::Exact
    }
}

impl std::fmt::Display for LabelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelMode::Exact => f.write_str("exact"),
            LabelMode::Sampled { fraction } => write!(f, "sampled({fraction})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub query_id: String,
    pub sql: String,
    pub category: QueryCategory,
    pub query: QueryAst,
    pub cardinality: u64,
    pub universe_size: u64,
    pub selectivity: f64,
    pub label_mode: LabelMode,
    #[serde(default)]
    pub low_confidence: bool,
    #[serde(default)]
    pub label_ms: f64,
}

impl LabeledQuery {
    fn new(q: &QueryAst, cardinality: u64, universe_size: u64, mode: LabelMode) -> Self {
        let selectivity = if universe_size == 0 {
            0.0
        } else {
            cardinality as f64 / universe_size as f64
        };
        Self {
            query_id: String::new(),
            sql: print_sql(q, Dialect::Generic),
            category: QueryCategory::of(q),
            query: q.clone(),
            cardinality,
            universe_size,
            selectivity,
            label_mode: mode,
            low_confidence: false,
            label_ms: 0.0,
        }
    }
}

/// Exact result cardinality of `q` over `db`.
pub fn execute_count(q: &QueryAst, db: &Database) -> Result<u64> {
    let prep = Prepared::new(q, db)?;
    prep.universe()?;
    prep.result_count(&prep.all_rows())
}

pub fn label_exact(q: &QueryAst, db: &Database) -> Result<LabeledQuery> {
    let prep = Prepared::new(q, db)?;
    let universe = prep.universe()?;
    let card = prep.result_count(&prep.all_rows())?;
    Ok(LabeledQuery::new(q, card, universe, LabelMode::Exact))
}

/// Estimates the label from a seeded Bernoulli sample of every FROM table.
///
/// Row counts are scaled by `1 / fraction^k` for `k` tables. Group counts of
/// aggregation queries are reported unscaled. The estimate is clamped to the
/// universe size.
pub fn label_sampled(q: &QueryAst, db: &Database, fraction: f64, seed: u64) -> Result<LabeledQuery> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Precondition(format!(
            "sampling fraction must be in (0, 1], got {fraction}"
        )));
    }
    let prep = Prepared::new(q, db)?;
    let universe = prep.universe()?;
    let mut empty_sample = false;
    let base: Vec<Vec<u32>> = prep
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = seed::rng(seed::indexed_seed(seed, i as u64));
            let rows: Vec<u32> = (0..t.row_count as u32)
                .filter(|_| rng.gen::<f64>() < fraction)
                .collect();
            empty_sample |= rows.is_empty() && t.row_count > 0;
            rows
        })
        .collect();
    let raw = prep.result_count(&base)?;
    let grouped = q.has_aggregate() || !q.group_by.is_empty();
    let estimate = if grouped {
        raw
    } else {
        let scale = fraction.powi(prep.tables.len() as i32);
        ((raw as f64 / scale).round() as u64).min(universe)
    };
    let mut label = LabeledQuery::new(q, estimate, universe, LabelMode::Sampled { fraction });
    label.low_confidence = empty_sample || (fraction < 1.0 && raw < LOW_CONFIDENCE_MIN_COUNT);
    Ok(label)
}

pub fn label_with(q: &QueryAst, db: &Database, mode: LabelMode, seed: u64) -> Result<LabeledQuery> {
    match mode {
        LabelMode::Exact => label_exact(q, db),
        LabelMode::Sampled { fraction } => label_sampled(q, db, fraction, seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFailure {
    pub query_id: String,
    pub sql: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelRun {
    pub labels: Vec<LabeledQuery>,
    pub failures: Vec<LabelFailure>,
}

/// Labels every query, isolating failures per query. Output order follows
/// input order. `jobs` caps the worker threads.
pub fn label_workload(
    queries: &[WorkloadQuery],
    db: &Database,
    mode: LabelMode,
    seed: u64,
    jobs: Option<usize>,
) -> LabelRun {
    let work = || {
        queries
            .par_iter()
            .map(|wq| {
                let start = Instant::now();
                let res = label_with(&wq.ast, db, mode, seed::sub_seed(seed, &wq.id));
                let ms = start.elapsed().as_secs_f64() * 1e3;
                res.map(|mut l| {
                    l.query_id = wq.id.clone();
                    l.sql = wq.sql.clone();
                    l.label_ms = ms;
                    l
                })
                .map_err(|e| LabelFailure {
                    query_id: wq.id.clone(),
                    sql: wq.sql.clone(),
                    error: e.to_string(),
                })
            })
            .collect::<Vec<_>>()
    };
    let results = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };
    let mut run = LabelRun::default();
    for r in results {
        match r {
            Ok(l) => run.labels.push(l),
            Err(f) => run.failures.push(f),
        }
    }
    run
}
