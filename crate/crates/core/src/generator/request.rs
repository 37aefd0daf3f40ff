use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::ColumnRef;
use crate::sql::{QueryAst, QueryCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    SchemaAware,
    ContextAware,
    WorkloadExpansion,
    SelectivityTargeted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectivityLevel {
    /// Few qualifying rows.
    Selective,
    /// Many qualifying rows.
    NonSelective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    EqualityOnly,
    InequalityOnly,
}

/// Which statistics slice accompanies a selectivity-targeted prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsStrategy {
    BoundariesOnly,
    SampleOnly,
    HistogramOnly,
}

impl StatsStrategy {
    pub const ALL: [StatsStrategy; 3] = [
        StatsStrategy::BoundariesOnly,
        StatsStrategy::SampleOnly,
        StatsStrategy::HistogramOnly,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StatsStrategy::BoundariesOnly => "Boundaries & Schema",
            StatsStrategy::SampleOnly => "Sample & Schema",
            StatsStrategy::HistogramOnly => "Histogram & Schema",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivityTarget {
    pub level: SelectivityLevel,
    pub predicate_kind: PredicateKind,
    /// Columns the predicates should constrain; defaults to `title.start_year`.
    #[serde(default = "default_target_columns")]
    pub target_columns: Vec<ColumnRef>,
}

fn default_target_columns() -> Vec<ColumnRef> {
    vec![ColumnRef::new("title", "start_year")]
}

impl SelectivityTarget {
    pub fn new(level: SelectivityLevel, predicate_kind: PredicateKind) -> Self {
        Self {
            level,
            predicate_kind,
            target_columns: default_target_columns(),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedEntry {
    Sql(String),
    Ast(QueryAst),
}

fn sql_or_ast<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<QueryAst>>, D::Error> {
    let entries: Option<Vec<SeedEntry>> = Option::deserialize(d)?;
    entries
        .map(|list| {
            list.into_iter()
                .map(|e| match e {
                    SeedEntry::Sql(s) => crate::sql::parse_sql(&s).map_err(serde::de::Error::custom),
                    SeedEntry::Ast(a) => Ok(a),
                })
                .collect()
        })
        .transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub intent: Intent,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_mix: Option<BTreeMap<QueryCategory, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_text: Option<String>,
    /// Given either as SQL strings or as serialized ASTs.
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "sql_or_ast")]
    pub seed_workload: Option<Vec<QueryAst>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selectivity_target: Option<SelectivityTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats_strategy: Option<StatsStrategy>,
    /// Fill a shortfall with single-edit mutations of accepted queries.
    #[serde(default = "yes")]
    pub top_up: bool,
}

impl GenerationRequest {
    pub fn new(intent: Intent, n: usize) -> Self {
        Self {
            intent,
            n,
            category_mix: None,
            context_text: None,
            seed_workload: None,
            selectivity_target: None,
            stats_strategy: None,
            top_up: true,
        }
    }

    pub fn schema_aware(n: usize) -> Self {
        Self::new(Intent::SchemaAware, n)
    }

    pub fn context_aware(n: usize, context: impl Into<String>) -> Self {
        Self {
            context_text: Some(context.into()),
            ..Self::new(Intent::ContextAware, n)
        }
    }

    pub fn expansion(n: usize, seed_workload: Vec<QueryAst>) -> Self {
        Self {
            seed_workload: Some(seed_workload),
            ..Self::new(Intent::WorkloadExpansion, n)
        }
    }

    pub fn selectivity(n: usize, target: SelectivityTarget, strategy: StatsStrategy) -> Self {
        Self {
            selectivity_target: Some(target),
            stats_strategy: Some(strategy),
            top_up: false,
            ..Self::new(Intent::SelectivityTargeted, n)
        }
    }

    pub fn with_mix(mut self, mix: impl IntoIterator<Item = (QueryCategory, usize)>) -> Self {
        self.category_mix = Some(mix.into_iter().collect());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Precondition(m.to_string()));
        if self.n == 0 {
            return fail("n must be at least 1");
        }
        if let Some(mix) = &self.category_mix {
            let total: usize = mix.values().sum();
            if total != self.n {
                return Err(Error::Precondition(format!(
                    "category mix sums to {total}, but n is {}",
                    self.n
                )));
            }
        }
        match self.intent {
            Intent::ContextAware if self.context_text.as_deref().map_or(true, |c| c.trim().is_empty()) => {
                fail("context-aware generation needs context_text")
            }
            Intent::WorkloadExpansion if self.seed_workload.as_ref().map_or(true, Vec::is_empty) => {
                fail("workload expansion needs a non-empty seed_workload")
            }
            Intent::SelectivityTargeted if self.selectivity_target.is_none() || self.stats_strategy.is_none() => {
                fail("selectivity-targeted generation needs selectivity_target and stats_strategy")
            }
            Intent::SelectivityTargeted
                if self
                    .selectivity_target
                    .as_ref()
                    .is_some_and(|t| t.target_columns.is_empty()) =>
            {
                fail("selectivity target lists no columns")
            }
            _ => Ok(()),
        }
    }
}
