//! Config-driven orchestration: statistics, generation, labeling, plan
//! labeling and reports, each stage reading the artifacts of the previous
//! one from the output directory.
//!
//! Output layout:
//!
//! - `stats.json`
//! - `queries.csv`, `queries.json`, `generation.json`, `transcript/` (live provider)
//! - `labels.csv`, `labels.json`, `label_failures.csv`
//! - `plans.csv`, `plan_failures.csv`
//! - `reports/*.json` and `reports/*.txt`
//! - `run.log`

mod config;

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{MetricsConfig, PlannerConfig, RunConfig, StatisticsConfig, DEFAULT_PLAN_LIMIT};

use crate::artifact;
use crate::error::{Error, Result};
use crate::generator::{generate_with_options, GenerateOptions, ProviderKind, Rejection};
use crate::labeler::{failures_csv, label_workload, write_labels, LabeledQuery};
use crate::metrics::{diversity, fidelity, selectivity_study, timing_study};
use crate::planner::{label_plan_workload, plans_csv};
use crate::schema::{compute_database_statistics, load_table_data, Database, SchemaCatalog, StatsMap};
use crate::seed;
use crate::sql::{canonical_key, QueryAst, QueryCategory};
use crate::workload::{query_id, queries_csv, read_queries, WorkloadQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stats,
    Generate,
    Label,
    Plans,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Stats, Stage::Generate, Stage::Label, Stage::Plans, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Stats => "stats",
            Stage::Generate => "generate",
            Stage::Label => "label",
            Stage::Plans => "plans",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    /// Some queries failed or a generation came up short.
    pub partial: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub stages: Vec<StageOutcome>,
}

impl RunOutcome {
    pub fn partial(&self) -> bool {
        self.stages.iter().any(|s| s.partial)
    }
}

/// Where each stage reads its inputs from. `None` means the output directory.
#[derive(Debug, Clone, Default)]
pub struct StageInputs {
    pub queries: Option<PathBuf>,
}

/// Appends timestamp-free lines to `run.log` and mirrors them to the logger.
struct RunLog {
    file: std::fs::File,
    path: PathBuf,
}

impl RunLog {
    fn open(out: &Path, fresh: bool) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let path = out.join("run.log");
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(!fresh)
            .write(true)
            .truncate(fresh)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self { file, path })
    }

    fn line(&mut self, msg: impl AsRef<str>) -> Result<()> {
        log::info!("{}", msg.as_ref());
        writeln!(self.file, "{}", msg.as_ref()).map_err(|e| Error::io(&self.path, e))
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    log: RunLog,
    catalog: Option<SchemaCatalog>,
    db: Option<Database>,
    stats: Option<StatsMap>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig, fresh_log: bool) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            log: RunLog::open(&cfg.output_dir, fresh_log)?,
            catalog: None,
            db: None,
            stats: None,
        })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn catalog(&mut self) -> Result<&SchemaCatalog> {
        if self.catalog.is_none() {
            self.catalog = Some(SchemaCatalog::load(self.cfg.schema_path())?);
        }
        Ok(self.catalog.as_ref().expect("loaded"))
    }

    fn load_data(&mut self) -> Result<()> {
        self.catalog()?;
        if self.db.is_none() {
            let catalog = self.catalog.as_ref().expect("loaded");
            self.db = Some(load_table_data(catalog, &self.cfg.data_dir)?);
        }
        Ok(())
    }

    /// Statistics from `stats.json`, written by the stats stage.
    fn load_stats(&mut self) -> Result<()> {
        if self.stats.is_none() {
            let list: Vec<crate::schema::ColumnStatistics> = artifact::read_json(&self.out("stats.json"))?;
            self.stats = Some(list.into_iter().map(|s| (s.column.clone(), s)).collect());
        }
        Ok(())
    }

    fn queries(&self, inputs: &StageInputs) -> Result<Vec<WorkloadQuery>> {
        let path = inputs.queries.clone().unwrap_or_else(|| self.out("queries.csv"));
        if !path.exists() {
            return Err(Error::MissingArtifact(path));
        }
        read_queries(&path)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.cfg.seed)
    }
}

/// Runs every stage in order. `run.log` is started afresh.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    let mut ctx = Ctx::new(cfg, true)?;
    ctx.log.line(format!("forge run seed={} out={}", cfg.seed, cfg.output_dir.display()))?;
    let mut outcome = RunOutcome::default();
    for stage in Stage::ALL {
        outcome.stages.push(run_in(&mut ctx, stage, &StageInputs::default())?);
    }
    ctx.log.line(if outcome.partial() { "finished with partial results" } else { "finished" })?;
    Ok(outcome)
}

/// Runs one stage from the artifacts already in the output directory.
pub fn run_stage(cfg: &RunConfig, stage: Stage, inputs: &StageInputs) -> Result<StageOutcome> {
    let mut ctx = Ctx::new(cfg, false)?;
    run_in(&mut ctx, stage, inputs)
}

fn run_in(ctx: &mut Ctx, stage: Stage, inputs: &StageInputs) -> Result<StageOutcome> {
    let start = Instant::now();
    ctx.log.line(format!("[{}] start", stage.name()))?;
    let result = match stage {
        Stage::Stats => stats_stage(ctx),
        Stage::Generate => generate_stage(ctx),
        Stage::Label => label_stage(ctx, inputs),
        Stage::Plans => plans_stage(ctx, inputs),
        Stage::Report => report_stage(ctx, inputs),
    };
    match result {
        Ok(notes) => {
            let partial = notes.iter().any(|n| n.partial);
            for n in &notes {
                ctx.log.line(format!("[{}] {}", stage.name(), n.text))?;
            }
            ctx.log.line(format!(
                "[{}] done in {:.0} ms{}",
                stage.name(),
                start.elapsed().as_secs_f64() * 1e3,
                if partial { " (partial)" } else { "" }
            ))?;
            Ok(StageOutcome {
                stage,
                partial,
                notes: notes.into_iter().map(|n| n.text).collect(),
            })
        }
        Err(e) => {
            ctx.log.line(format!("[{}] failed: {e}", stage.name()))?;
            Err(e)
        }
    }
}

struct Note {
    text: String,
    partial: bool,
}

fn info(text: impl Into<String>) -> Note {
    Note {
        text: text.into(),
        partial: false,
    }
}

fn partial(text: impl Into<String>) -> Note {
    Note {
        text: text.into(),
        partial: true,
    }
}

fn stats_stage(ctx: &mut Ctx) -> Result<Vec<Note>> {
    ctx.load_data()?;
    let s = &ctx.cfg.statistics;
    let stats = compute_database_statistics(
        ctx.db.as_ref().expect("loaded"),
        s.sample_size,
        s.bucket_count,
        seed::sub_seed(ctx.cfg.seed, "stats"),
    )?;
    let list: Vec<_> = stats.values().collect();
    artifact::write_json(&ctx.out("stats.json"), &list)?;
    let note = info(format!("{} columns", stats.len()));
    ctx.stats = Some(stats);
    Ok(vec![note])
}

#[derive(Debug, Serialize)]
struct RequestSummary {
    request: usize,
    intent: crate::generator::Intent,
    requested: usize,
    accepted: usize,
    from_provider: usize,
    calls_made: usize,
    failed_calls: usize,
    incomplete: bool,
    notices: Vec<String>,
    rejected: Vec<Rejection>,
}

fn generate_stage(ctx: &mut Ctx) -> Result<Vec<Note>> {
    let cfg = ctx.cfg;
    if cfg.requests.is_empty() {
        return Err(Error::Config("no generation requests configured".into()));
    }
    ctx.catalog()?;
    ctx.load_stats()?;
    let catalog = ctx.catalog.as_ref().expect("loaded");
    let stats = ctx.stats.as_ref().expect("loaded");
    let base = seed::sub_seed(cfg.seed, "generate");
    let mut notes = Vec::new();
    let mut summaries = Vec::new();
    let mut queries: Vec<WorkloadQuery> = Vec::new();
    let mut seen = HashSet::new();
    for (i, req) in cfg.requests.iter().enumerate() {
        let mut profile = cfg.provider.clone();
        profile.seed = seed::indexed_seed(base, i as u64);
        let opts = GenerateOptions {
            transcript_dir: (profile.kind == ProviderKind::Live)
                .then(|| ctx.cfg.output_dir.join("transcript").join(format!("request_{:02}", i + 1))),
            jobs: cfg.jobs,
        };
        let res = generate_with_options(req, &profile, catalog, stats, &opts)?;
        let mut accepted = 0;
        for wq in &res.queries {
            if seen.insert(canonical_key(&wq.ast)) {
                let mut q = wq.clone();
                q.id = query_id(queries.len());
                queries.push(q);
                accepted += 1;
            }
        }
        if accepted < res.queries.len() {
            notes.push(info(format!(
                "request {}: dropped {} queries already produced by an earlier request",
                i + 1,
                res.queries.len() - accepted
            )));
        }
        let line = format!(
            "request {}: {} of {} queries, {} calls, {} rejected",
            i + 1,
            res.queries.len(),
            req.n,
            res.calls_made,
            res.rejected.len()
        );
        notes.push(if res.incomplete { partial(line) } else { info(line) });
        summaries.push(RequestSummary {
            request: i + 1,
            intent: req.intent,
            requested: req.n,
            accepted: res.queries.len(),
            from_provider: res.provider_count(),
            calls_made: res.calls_made,
            failed_calls: res.failed_calls,
            incomplete: res.incomplete,
            notices: res.notices.clone(),
            rejected: res.rejected.clone(),
        });
    }
    artifact::write_atomic(&ctx.out("queries.csv"), &queries_csv(ctx.seed(), &queries)?)?;
    artifact::write_json(&ctx.out("queries.json"), &queries)?;
    artifact::write_json(&ctx.out("generation.json"), &summaries)?;
    notes.push(info(format!("{} queries written", queries.len())));
    Ok(notes)
}

fn label_stage(ctx: &mut Ctx, inputs: &StageInputs) -> Result<Vec<Note>> {
    let queries = ctx.queries(inputs)?;
    ctx.load_data()?;
    let cfg = ctx.cfg;
    let run = label_workload(
        &queries,
        ctx.db.as_ref().expect("loaded"),
        cfg.labeling,
        seed::sub_seed(cfg.seed, "label"),
        cfg.jobs,
    );
    write_labels(&cfg.output_dir, ctx.seed(), &run.labels, false)?;
    artifact::write_atomic(&ctx.out("label_failures.csv"), &failures_csv(ctx.seed(), &run.failures)?)?;
    let mut notes = vec![info(format!("{} of {} queries labeled ({})", run.labels.len(), queries.len(), cfg.labeling))];
    for f in &run.failures {
        notes.push(partial(format!("{}: {}", f.query_id, f.error)));
    }
    Ok(notes)
}

fn plans_stage(ctx: &mut Ctx, inputs: &StageInputs) -> Result<Vec<Note>> {
    let queries = ctx.queries(inputs)?;
    ctx.load_data()?;
    let cfg = ctx.cfg;
    let run = label_plan_workload(
        &queries,
        ctx.db.as_ref().expect("loaded"),
        ctx.catalog.as_ref().expect("loaded"),
        &cfg.planner.params,
        cfg.planner.limit,
        seed::sub_seed(cfg.seed, "plans"),
        cfg.jobs,
    );
    artifact::write_atomic(&ctx.out("plans.csv"), &plans_csv(ctx.seed(), &run.sets)?)?;
    artifact::write_atomic(&ctx.out("plan_failures.csv"), &failures_csv(ctx.seed(), &run.failures)?)?;
    let rows: usize = run.sets.iter().map(|s| s.plans.len()).sum();
    let mut notes = vec![info(format!(
        "{} of {} queries planned, {} plan rows",
        run.sets.len(),
        queries.len(),
        rows
    ))];
    for f in &run.failures {
        notes.push(partial(format!("{}: {}", f.query_id, f.error)));
    }
    Ok(notes)
}

#[derive(Debug, Serialize)]
struct CategoryLabels {
    count: usize,
    mean_selectivity: f64,
    mean_cardinality: f64,
}

#[derive(Debug, Serialize)]
struct LabelSummary {
    labeled: usize,
    low_confidence: usize,
    by_category: BTreeMap<QueryCategory, CategoryLabels>,
}

fn label_summary(labels: &[LabeledQuery]) -> LabelSummary {
    let mut by_category = BTreeMap::new();
    for cat in QueryCategory::ALL {
        let of: Vec<&LabeledQuery> = labels.iter().filter(|l| l.category == cat).collect();
        if of.is_empty() {
            continue;
        }
        let n = of.len() as f64;
        by_category.insert(
            cat,
            CategoryLabels {
                count: of.len(),
                mean_selectivity: of.iter().map(|l| l.selectivity).sum::<f64>() / n,
                mean_cardinality: of.iter().map(|l| l.cardinality as f64).sum::<f64>() / n,
            },
        );
    }
    LabelSummary {
        labeled: labels.len(),
        low_confidence: labels.iter().filter(|l| l.low_confidence).count(),
        by_category,
    }
}

impl LabelSummary {
    fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut s = format!("Labels: {} queries, {} low-confidence\n\n", self.labeled, self.low_confidence);
        let _ = writeln!(s, "{:<20}{:>8}{:>16}{:>18}", "Category", "Count", "Avg. sel.", "Avg. card.");
        for (c, l) in &self.by_category {
            let _ = writeln!(
                s,
                "{:<20}{:>8}{:>16.6}{:>18.1}",
                c.label(),
                l.count,
                l.mean_selectivity,
                l.mean_cardinality
            );
        }
        s
    }
}

fn write_report<T: Serialize>(dir: &Path, name: &str, value: &T, text: &str) -> Result<()> {
    artifact::write_json(&dir.join(format!("{name}.json")), value)?;
    artifact::write_atomic(&dir.join(format!("{name}.txt")), text.as_bytes())
}

fn report_stage(ctx: &mut Ctx, inputs: &StageInputs) -> Result<Vec<Note>> {
    let queries = ctx.queries(inputs)?;
    let labels: Vec<LabeledQuery> = artifact::read_json(&ctx.out("labels.json"))?;
    ctx.catalog()?;
    let cfg = ctx.cfg;
    let dir = ctx.out("reports");
    let asts: Vec<QueryAst> = queries.iter().map(|q| q.ast.clone()).collect();
    let mut notes = Vec::new();

    let summary = label_summary(&labels);
    write_report(&dir, "labels", &summary, &summary.render_text())?;
    notes.push(info("labels report written"));

    let catalog = ctx.catalog.as_ref().expect("loaded");
    if cfg.metrics.diversity {
        let r = diversity(&asts, catalog);
        write_report(&dir, "diversity", &r, &r.render_text())?;
        notes.push(info("diversity report written"));
    }
    if let Some(path) = &cfg.metrics.fidelity_reference {
        let reference: Vec<QueryAst> = read_queries(path)?.into_iter().map(|q| q.ast).collect();
        let r = fidelity(&asts, &reference, catalog)?;
        write_report(&dir, "fidelity", &r, &r.render_text())?;
        notes.push(info("fidelity report written"));
    }
    if cfg.metrics.selectivity.is_some() || cfg.metrics.timing.is_some() {
        ctx.load_stats()?;
    }
    if let Some(opts) = &cfg.metrics.selectivity {
        ctx.load_data()?;
        let mut opts = opts.clone();
        opts.seed = seed::sub_seed(cfg.seed, "selectivity");
        opts.jobs = opts.jobs.or(cfg.jobs);
        let mut profile = cfg.provider.clone();
        profile.seed = opts.seed;
        let m = selectivity_study(
            ctx.catalog.as_ref().expect("loaded"),
            ctx.db.as_ref().expect("loaded"),
            ctx.stats.as_ref().expect("loaded"),
            &profile,
            &opts,
        )?;
        write_report(&dir, "selectivity", &m, &m.render_text())?;
        notes.push(if m.has_sparse_cells() {
            info("selectivity report written with sparse cells")
        } else {
            info("selectivity report written")
        });
    }
    if let Some(sizes) = &cfg.metrics.timing {
        let mut profile = cfg.provider.clone();
        profile.seed = seed::sub_seed(cfg.seed, "timing");
        let r = timing_study(
            &profile,
            ctx.catalog.as_ref().expect("loaded"),
            ctx.stats.as_ref().expect("loaded"),
            sizes,
        )?;
        write_report(&dir, "timing", &r, &r.render_text())?;
        let short: Vec<String> = r.rows.iter().filter(|r| r.incomplete).map(|r| r.requested.to_string()).collect();
        notes.push(if short.is_empty() {
            info("timing report written")
        } else {
            info(format!("timing report written; incomplete at sizes {}", short.join(", ")))
        });
    }
    Ok(notes)
}
