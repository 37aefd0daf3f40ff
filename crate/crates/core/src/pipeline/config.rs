use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GenerationRequest, ProviderProfile};
use crate::labeler::LabelMode;
use crate::metrics::{SelectivityStudyOptions, DEFAULT_SIZES};
use crate::planner::CostParams;
use crate::schema::{DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};

pub const DEFAULT_PLAN_LIMIT: usize = 100;

fn default_plan_limit() -> usize {
    DEFAULT_PLAN_LIMIT
}
fn default_sample_size() -> usize {
    DEFAULT_SAMPLE_SIZE
}
fn default_bucket_count() -> usize {
    DEFAULT_BUCKET_COUNT
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("forge-out")
}
fn default_provider() -> ProviderProfile {
    ProviderProfile::mock(0)
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    #[serde(default = "default_bucket_count")]
    pub bucket_count: usize,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self {
            sample_size: DEFAULT_SAMPLE_SIZE,
            bucket_count: DEFAULT_BUCKET_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    #[serde(default)]
    pub params: CostParams,
    #[serde(default = "default_plan_limit")]
    pub limit: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            params: CostParams::default(),
            limit: DEFAULT_PLAN_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "yes")]
    pub diversity: bool,
    /// Reference workload (`.sql` or `queries.csv`) for the fidelity report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_reference: Option<PathBuf>,
    /// Runs the strategy-by-selectivity study when present. Its seed is
    /// derived from the global seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selectivity: Option<SelectivityStudyOptions>,
    /// Workload sizes for the timing study; absent disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<usize>>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            diversity: true,
            fidelity_reference: None,
            selectivity: None,
            timing: None,
        }
    }
}

/// One end-to-end run. Relative paths are resolved against the directory
/// of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Defaults to `<data_dir>/schema.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    pub data_dir: PathBuf,
    #[serde(default = "default_provider")]
    pub provider: ProviderProfile,
    #[serde(default)]
    pub requests: Vec<GenerationRequest>,
    #[serde(default)]
    pub labeling: LabelMode,
    #[serde(default)]
    pub statistics: StatisticsConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// A mock-provider config over `data_dir` with one schema-aware request.
    pub fn mock(data_dir: impl Into<PathBuf>, n: usize) -> Self {
        Self {
            schema: None,
            data_dir: data_dir.into(),
            provider: default_provider(),
            requests: vec![GenerationRequest::schema_aware(n)],
            labeling: LabelMode::Exact,
            statistics: StatisticsConfig::default(),
            planner: PlannerConfig::default(),
            metrics: MetricsConfig {
                timing: Some(DEFAULT_SIZES.to_vec()),
                ..MetricsConfig::default()
            },
            output_dir: default_output_dir(),
            seed: 0,
            jobs: None,
        }
    }

    /// Reads a JSON config and resolves relative paths against the file's
    /// directory. A `${VAR}` API key is left for the live provider to expand.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::Config(format!("config file {} does not exist", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.output_dir);
        if let Some(s) = &mut self.schema {
            fix(s);
        }
        if let Some(r) = &mut self.metrics.fidelity_reference {
            fix(r);
        }
    }

    pub fn schema_path(&self) -> PathBuf {
        self.schema.clone().unwrap_or_else(|| self.data_dir.join("schema.json"))
    }

    /// Checks values and that every referenced input path exists.
    pub fn validate(&self) -> Result<()> {
        if !self.data_dir.is_dir() {
            return Err(Error::Config(format!("data directory {} does not exist", self.data_dir.display())));
        }
        let schema = self.schema_path();
        if !schema.is_file() {
            return Err(Error::Config(format!("schema file {} does not exist", schema.display())));
        }
        if let Some(r) = &self.metrics.fidelity_reference {
            if !r.is_file() {
                return Err(Error::Config(format!("fidelity reference {} does not exist", r.display())));
            }
        }
        self.provider.validate()?;
        for (i, r) in self.requests.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::Config(format!("request {}: {e}", i + 1)))?;
        }
        if self.planner.limit == 0 {
            return Err(Error::Config("planner limit must be at least 1".into()));
        }
        self.planner.params.validate()?;
        if self.statistics.sample_size == 0 || self.statistics.bucket_count == 0 {
            return Err(Error::Config("statistics sample_size and bucket_count must be at least 1".into()));
        }
        if let LabelMode::Sampled { fraction } = self.labeling {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::Config(format!("sampling fraction {fraction} is outside (0, 1]")));
            }
        }
        Ok(())
    }
}
