//! `forge`: run the whole workload pipeline from a config, or one stage at a time.
//!
//! Exit codes: 0 success, 1 configuration or fatal error, 2 partial results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use forge::generator::{GenerationRequest, ProviderKind};
use forge::pipeline::{run_pipeline, run_stage, RunConfig, Stage, StageInputs};

#[derive(Parser)]
#[command(name = "forge", version, about = "Synthetic SQL workload generation and labeling")]
struct Cli {
    /// Global seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run config (JSON). Without one, the bundled dataset and the mock provider are used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding `schema.json` and the table CSVs.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Mock,
    Live,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage from a config file.
    Run { config: PathBuf },
    /// Compute column statistics.
    Stats(Common),
    /// Generate a workload from the configured requests.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Replace the configured requests with one schema-aware request of this size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        provider: Option<ProviderArg>,
        /// Chat-completions URL for the live provider.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Label queries with exact (or sampled) cardinalities.
    Label {
        #[command(flatten)]
        common: Common,
        /// Queries to label (`.sql` or `queries.csv`); defaults to the output directory.
        #[arg(long)]
        queries: Option<PathBuf>,
    },
    /// Enumerate and cost plans.
    Plans {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Plans kept per query.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Write diversity, fidelity, selectivity and timing reports.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        queries: Option<PathBuf>,
    },
}

fn load(common: &Common) -> forge::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::mock(forge::dataset::bundled_dir(), 100),
    };
    if let Some(d) = &common.data_dir {
        cfg.data_dir = d.clone();
    }
    Ok(cfg)
}

fn apply_globals(cli: &Cli, cfg: &mut RunConfig) {
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
}

fn execute(cli: &Cli) -> forge::Result<bool> {
    let (mut cfg, stage, inputs) = match &cli.command {
        Command::Run { config } => {
            let mut cfg = RunConfig::load(config)?;
            apply_globals(cli, &mut cfg);
            let outcome = run_pipeline(&cfg)?;
            for s in &outcome.stages {
                for n in &s.notes {
                    println!("[{}] {n}", s.stage.name());
                }
            }
            println!("artifacts in {}", cfg.output_dir.display());
            return Ok(outcome.partial());
        }
        Command::Stats(common) => (load(common)?, Stage::Stats, StageInputs::default()),
        Command::Generate {
            common,
            n,
            provider,
            endpoint,
            model,
        } => {
            let mut cfg = load(common)?;
            if let Some(n) = n {
                cfg.requests = vec![GenerationRequest::schema_aware(*n)];
            }
            match provider {
                Some(ProviderArg::Mock) => cfg.provider.kind = ProviderKind::Mock,
                Some(ProviderArg::Live) => cfg.provider.kind = ProviderKind::Live,
                None => {}
            }
            if endpoint.is_some() {
                cfg.provider.endpoint = endpoint.clone();
            }
            if model.is_some() {
                cfg.provider.model = model.clone();
            }
            (cfg, Stage::Generate, StageInputs::default())
        }
        Command::Label { common, queries } => (
            load(common)?,
            Stage::Label,
            StageInputs {
                queries: queries.clone(),
            },
        ),
        Command::Plans { common, queries, limit } => {
            let mut cfg = load(common)?;
            if let Some(l) = limit {
                cfg.planner.limit = *l;
            }
            (
                cfg,
                Stage::Plans,
                StageInputs {
                    queries: queries.clone(),
                },
            )
        }
        Command::Report { common, queries } => (
            load(common)?,
            Stage::Report,
            StageInputs {
                queries: queries.clone(),
            },
        ),
    };
    apply_globals(cli, &mut cfg);
    let outcome = run_stage(&cfg, stage, &inputs)?;
    for n in &outcome.notes {
        println!("[{}] {n}", stage.name());
    }
    Ok(outcome.partial)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
