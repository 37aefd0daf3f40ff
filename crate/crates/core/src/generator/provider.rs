use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::live::LiveProvider;
use crate::generator::mock::MockProvider;
use crate::generator::request::GenerationRequest;
use crate::schema::{SchemaCatalog, StatsMap};
use crate::sql::QueryCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// Seeded grammar-based generator; needs no network.
    Mock,
    /// OpenAI-compatible chat-completions endpoint.
    Live,
}

fn default_temperature() -> f64 {
    0.7
}
fn default_per_call() -> usize {
    20
}
fn default_timeout() -> u64 {
    60_000
}
fn default_retries() -> usize {
    3
}
fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// API key, usually given as `${ENV_VAR}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_per_call")]
    pub max_queries_per_call: usize,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    /// Consecutive failed calls tolerated before a generation gives up.
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    /// Calls issued concurrently per round.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

impl ProviderProfile {
    pub fn mock(seed: u64) -> Self {
        Self {
            kind: ProviderKind::Mock,
            endpoint: None,
            model: None,
            temperature: default_temperature(),
            api_key: None,
            seed,
            max_queries_per_call: default_per_call(),
            timeout_ms: default_timeout(),
            max_retries: default_retries(),
            parallelism: default_parallelism(),
        }
    }

    pub fn live(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            kind: ProviderKind::Live,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            ..Self::mock(0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_queries_per_call == 0 {
            return Err(Error::Config("max_queries_per_call must be at least 1".into()));
        }
        if self.max_retries == 0 {
            return Err(Error::Config("max_retries must be at least 1".into()));
        }
        if self.kind == ProviderKind::Live && self.endpoint.is_none() {
            return Err(Error::Config("live provider needs an endpoint".into()));
        }
        Ok(())
    }
}

/// Everything a provider sees for one call.
pub struct ProviderCall<'a> {
    pub prompt: &'a str,
    /// The request for this call; `n` is the batch size.
    pub request: &'a GenerationRequest,
    pub catalog: &'a SchemaCatalog,
    pub stats: &'a StatsMap,
    pub call_index: usize,
    pub category: Option<QueryCategory>,
}

/// A generation backend: one call in, raw response text out.
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, call: &ProviderCall<'_>) -> Result<String>;
}

pub fn provider_from_profile(profile: &ProviderProfile) -> Result<Box<dyn Provider>> {
    profile.validate()?;
    Ok(match profile.kind {
        ProviderKind::Mock => Box::new(MockProvider::new(profile.seed)),
        ProviderKind::Live => Box::new(LiveProvider::new(profile)?),
    })
}
