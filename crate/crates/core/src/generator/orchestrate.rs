//! Batched generation: calls, parsing, validation, dedup and top-up.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::artifact;
use crate::error::{Error, Result};
use crate::generator::prompt::build_prompt;
use crate::generator::provider::{provider_from_profile, Provider, ProviderCall, ProviderProfile};
use crate::generator::request::{GenerationRequest, Intent, StatsStrategy};
use crate::schema::stats::find_stats;
use crate::schema::{SchemaCatalog, StatsMap};
use crate::seed;
use crate::sql::{
    canonical_key, mutate_query, parse_sql, print_sql, split_statements, validate, Dialect, QueryAst, QueryCategory,
};
use crate::workload::{query_id, Footprint, Origin, WorkloadQuery};

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    /// Directory for `call_NNNN.txt` prompt/response transcripts.
    pub transcript_dir: Option<PathBuf>,
    /// Caps concurrent calls below the profile's parallelism.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub call_index: usize,
    pub raw: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub queries: Vec<WorkloadQuery>,
    pub rejected: Vec<Rejection>,
    pub per_call_latency_ms: Vec<f64>,
    pub calls_made: usize,
    pub failed_calls: usize,
    /// Fewer than the requested number of queries were produced.
    pub incomplete: bool,
    pub notices: Vec<String>,
    pub total_ms: f64,
}

impl GenerationResult {
    pub fn asts(&self) -> Vec<QueryAst> {
        self.queries.iter().map(|q| q.ast.clone()).collect()
    }

    pub fn provider_count(&self) -> usize {
        self.queries.iter().filter(|q| q.origin == Origin::Provider).count()
    }
}

/// Generates `req.n` queries with the provider described by `profile`.
pub fn generate_workload(
    req: &GenerationRequest,
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
) -> Result<GenerationResult> {
    generate_with_options(req, profile, catalog, stats, &GenerateOptions::default())
}

pub fn generate_with_options(
    req: &GenerationRequest,
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    opts: &GenerateOptions,
) -> Result<GenerationResult> {
    req.validate()?;
    let provider = provider_from_profile(profile)?;
    generate_with(req, provider.as_ref(), profile, catalog, stats, opts)
}

/// Generation against an explicit provider. `profile` supplies batching,
/// retry and parallelism settings.
pub fn generate_with(
    req: &GenerationRequest,
    provider: &dyn Provider,
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    opts: &GenerateOptions,
) -> Result<GenerationResult> {
    req.validate()?;
    profile.validate()?;
    check_target_stats(req, stats)?;
    let start = Instant::now();
    if let Some(dir) = &opts.transcript_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let slots: Vec<(Option<QueryCategory>, usize)> = match &req.category_mix {
        Some(mix) => mix.iter().filter(|(_, n)| **n > 0).map(|(c, n)| (Some(*c), *n)).collect(),
        None => vec![(None, req.n)],
    };
    let width = profile.parallelism.max(1).min(opts.jobs.unwrap_or(usize::MAX).max(1));

    let mut run = Run {
        res: GenerationResult::default(),
        seen: HashSet::new(),
        accepted: Vec::new(),
        next_call: 0,
        offered: 0,
    };
    for (category, want) in slots {
        let mut got = 0usize;
        // Consecutive failed calls; a call that adds a query resets it.
        let mut streak = 0usize;
        let offered_at_start = run.offered;
        while got < want && streak < profile.max_retries {
            // Ask for more than is missing in proportion to the share of
            // statements this slot has rejected so far.
            let needed = want - got;
            let offered = run.offered - offered_at_start;
            let asked = if offered == 0 {
                needed
            } else {
                (needed * offered).div_ceil(got.max(1))
            };
            let calls = width
                .min(asked.div_ceil(profile.max_queries_per_call))
                .min(profile.max_retries - streak)
                .max(1);
            let mut batch = Vec::with_capacity(calls);
            for j in 0..calls {
                let n = profile
                    .max_queries_per_call
                    .min(asked.saturating_sub(j * profile.max_queries_per_call))
                    .max(1);
                let mut sub = req.clone();
                sub.n = n;
                sub.category_mix = category.map(|c| BTreeMap::from([(c, n)]));
                let prompt = build_prompt(&sub, catalog, stats);
                batch.push((run.next_call + j, sub, prompt));
            }
            run.next_call += calls;

            let outputs: Vec<(Result<String>, f64)> = std::thread::scope(|s| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|(idx, sub, prompt)| {
                        s.spawn(move || {
                            let t = Instant::now();
                            let call = ProviderCall {
                                prompt,
                                request: sub,
                                catalog,
                                stats,
                                call_index: *idx,
                                category,
                            };
                            let out = provider.complete(&call);
                            (out, t.elapsed().as_secs_f64() * 1e3)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join()
                            .unwrap_or_else(|_| (Err(Error::Provider("provider call panicked".into())), 0.0))
                    })
                    .collect()
            });

            for ((idx, _, prompt), (out, ms)) in batch.iter().zip(outputs) {
                run.res.calls_made += 1;
                run.res.per_call_latency_ms.push(ms);
                if let Some(dir) = &opts.transcript_dir {
                    let body = match &out {
                        Ok(text) => format!("PROMPT\n{prompt}\n\nRESPONSE\n{text}\n"),
                        Err(e) => format!("PROMPT\n{prompt}\n\nERROR\n{e}\n"),
                    };
                    artifact::write_atomic(&dir.join(format!("call_{:04}.txt", idx + 1)), body.as_bytes())?;
                }
                let text = match out {
                    Ok(t) => t,
                    Err(e) => {
                        run.res.failed_calls += 1;
                        streak += 1;
                        run.res.notices.push(format!("call {} failed: {e}", idx + 1));
                        continue;
                    }
                };
                let accepted = run.absorb(*idx, &text, category, want - got, catalog);
                got += accepted;
                if accepted > 0 {
                    streak = 0;
                }
                if accepted == 0 {
                    run.res.failed_calls += 1;
                    streak += 1;
                    run.res.notices.push(format!("call {} yielded no usable statement", idx + 1));
                }
            }
        }

        if got < want && req.top_up {
            let mut pool: Vec<QueryAst> = run
                .accepted
                .iter()
                .filter(|(_, c)| category.map_or(true, |want| *c == want))
                .map(|(q, _)| q.clone())
                .collect();
            if req.intent == Intent::WorkloadExpansion {
                pool.extend(req.seed_workload.iter().flatten().cloned());
            }
            let filled = run.top_up(&pool, category, want - got, catalog, stats, profile.seed);
            if filled > 0 {
                run.res
                    .notices
                    .push(format!("topped up {filled} queries by mutation"));
            }
            got += filled;
        }
        if got < want {
            run.res.incomplete = true;
            let what = category.map_or("queries".to_string(), |c| format!("{} queries", c.label()));
            run.res.notices.push(format!("produced {got} of {want} {what}"));
        }
    }
    run.res.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(run.res)
}

/// Drops chatty text a model may put before the first `SELECT`.
fn strip_preamble(raw: &str) -> &str {
    let upper = raw.to_ascii_uppercase();
    let mut from = 0;
    while let Some(pos) = upper[from..].find("SELECT") {
        let at = from + pos;
        let boundary = at == 0 || !upper.as_bytes()[at - 1].is_ascii_alphanumeric() && upper.as_bytes()[at - 1] != b'_';
        if boundary {
            return &raw[at..];
        }
        from = at + 6;
    }
    raw
}

/// Selectivity-targeted requests need the statistics slice of their
/// strategy for every target column.
fn check_target_stats(req: &GenerationRequest, stats: &StatsMap) -> Result<()> {
    let (Some(target), Some(strategy)) = (&req.selectivity_target, req.stats_strategy) else {
        return Ok(());
    };
    for col in &target.target_columns {
        let Some(s) = find_stats(stats, col) else {
            return Err(Error::MissingStatistics(col.to_string()));
        };
        let present = match strategy {
            StatsStrategy::BoundariesOnly => s.min.is_some() && s.max.is_some(),
            StatsStrategy::SampleOnly => !s.sample.is_empty(),
            StatsStrategy::HistogramOnly => !s.histogram.is_empty(),
        };
        if !present {
            return Err(Error::MissingStatistics(format!("{col} ({})", strategy.label())));
        }
    }
    Ok(())
}

struct Run {
    res: GenerationResult,
    seen: HashSet<String>,
    accepted: Vec<(QueryAst, QueryCategory)>,
    next_call: usize,
    /// Statements returned by the provider so far.
    offered: usize,
}

impl Run {
    fn push(&mut self, ast: QueryAst, origin: Origin) {
        let category = QueryCategory::of(&ast);
        let id = query_id(self.res.queries.len());
        self.res.queries.push(WorkloadQuery::new(id, ast.clone(), origin));
        self.accepted.push((ast, category));
    }

    /// Parses and screens one response; returns how many statements were accepted.
    fn absorb(
        &mut self,
        call_index: usize,
        text: &str,
        category: Option<QueryCategory>,
        room: usize,
        catalog: &SchemaCatalog,
    ) -> usize {
        let mut taken = 0;
        for raw in split_statements(text) {
            self.offered += 1;
            let raw = strip_preamble(&raw).to_string();
            let reject = |reason: String| Rejection { call_index, raw: raw.clone(), reason };
            let ast = match parse_sql(&raw) {
                Ok(a) => a,
                Err(e) => {
                    self.res.rejected.push(reject(e.to_string()));
                    continue;
                }
            };
            let report = validate(&ast, catalog);
            if !report.is_valid() {
                self.res.rejected.push(reject(report.summary()));
                continue;
            }
            if parse_sql(&print_sql(&ast, Dialect::Generic)).ok().as_ref() != Some(&ast) {
                self.res.rejected.push(reject("does not survive a print/parse round trip".into()));
                continue;
            }
            let got = QueryCategory::of(&ast);
            if let Some(want) = category {
                if got != want {
                    self.res
                        .rejected
                        .push(reject(format!("category {} where {} was requested", got.label(), want.label())));
                    continue;
                }
            }
            if !self.seen.insert(canonical_key(&ast)) {
                self.res.rejected.push(reject("duplicate of an accepted query".into()));
                continue;
            }
            if taken == room {
                self.res.rejected.push(reject("surplus beyond the requested count".into()));
                continue;
            }
            self.push(ast, Origin::Provider);
            taken += 1;
        }
        taken
    }

    /// Fills up to `missing` slots with single-edit variants of `pool`.
    fn top_up(
        &mut self,
        pool: &[QueryAst],
        category: Option<QueryCategory>,
        missing: usize,
        catalog: &SchemaCatalog,
        stats: &StatsMap,
        seed_value: u64,
    ) -> usize {
        let base = seed::sub_seed(seed_value, "top_up");
        let mut filled = 0;
        let mut round = 0u64;
        // Each pass asks every pool query for one more variant; stop once a
        // full pass adds nothing.
        while filled < missing && !pool.is_empty() && round < 64 {
            let before = filled;
            for (i, q) in pool.iter().enumerate() {
                if filled == missing {
                    break;
                }
                let s = seed::indexed_seed(base, round * pool.len() as u64 + i as u64);
                for v in mutate_query(q, catalog, stats, s, 1).queries() {
                    if category.is_some_and(|c| QueryCategory::of(&v) != c) {
                        continue;
                    }
                    if self.seen.insert(canonical_key(&v)) {
                        self.push(v, Origin::Mutation);
                        filled += 1;
                    }
                }
            }
            if filled == before && round > 4 {
                break;
            }
            round += 1;
        }
        filled
    }
}

/// Expands a seed workload to `n` queries, recording queries that reach
/// beyond the seed footprint.
pub fn expand_workload(
    seed_workload: &[QueryAst],
    n: usize,
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
) -> Result<GenerationResult> {
    expand_with(seed_workload, n, None, profile, catalog, stats, &GenerateOptions::default())
}

/// [`expand_workload`] with an optional explicit provider.
pub fn expand_with(
    seed_workload: &[QueryAst],
    n: usize,
    provider: Option<&dyn Provider>,
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    opts: &GenerateOptions,
) -> Result<GenerationResult> {
    for (i, q) in seed_workload.iter().enumerate() {
        let report = validate(q, catalog);
        if !report.is_valid() {
            return Err(Error::Precondition(format!("seed query {} is invalid: {}", i + 1, report.summary())));
        }
    }
    let req = GenerationRequest::expansion(n, seed_workload.to_vec());
    req.validate()?;
    let mut res = match provider {
        Some(p) => generate_with(&req, p, profile, catalog, stats, opts)?,
        None => generate_with_options(&req, profile, catalog, stats, opts)?,
    };
    let mut footprint = Footprint::default();
    for q in seed_workload {
        footprint.add(q, catalog);
    }
    for q in &res.queries {
        let fp = Footprint::of(&q.ast, catalog);
        if !fp.within(&footprint) {
            let extra: Vec<String> = fp
                .columns
                .difference(&footprint.columns)
                .map(|(t, c)| format!("{t}.{c}"))
                .chain(fp.tables.difference(&footprint.tables).cloned())
                .collect();
            res.notices
                .push(format!("{} reaches outside the seed footprint: {}", q.id, extra.join(", ")));
        }
    }
    Ok(res)
}
