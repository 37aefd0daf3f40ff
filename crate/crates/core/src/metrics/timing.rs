use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{generate_workload, GenerationRequest, ProviderProfile};
use crate::schema::{SchemaCatalog, StatsMap};

pub const DEFAULT_SIZES: [usize; 6] = [10, 20, 30, 40, 50, 100];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub requested: usize,
    pub accepted: usize,
    pub calls_made: usize,
    pub total_ms: f64,
    /// `total_ms / accepted`; absent when nothing was accepted.
    pub avg_ms_per_query: Option<f64>,
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub provider: String,
    pub rows: Vec<TimingRow>,
}

/// Times one schema-aware generation per requested workload size.
pub fn timing_study(
    profile: &ProviderProfile,
    catalog: &SchemaCatalog,
    stats: &StatsMap,
    sizes: &[usize],
) -> Result<TimingReport> {
    if sizes.is_empty() {
        return Err(Error::Precondition("timing study needs at least one size".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Precondition("timing study sizes must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let res = generate_workload(&GenerationRequest::schema_aware(n), profile, catalog, stats)?;
        let accepted = res.queries.len();
        rows.push(TimingRow {
            requested: n,
            accepted,
            calls_made: res.calls_made,
            total_ms: res.total_ms,
            avg_ms_per_query: (accepted > 0).then(|| res.total_ms / accepted as f64),
            incomplete: res.incomplete,
        });
    }
    Ok(TimingReport {
        provider: format!("{:?}", profile.kind).to_lowercase(),
        rows,
    })
}

impl TimingReport {
    /// One column per workload size.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let w0 = 26;
        let w = 10;
        let mut s = String::new();
        let _ = writeln!(s, "Execution time for different numbers of queries ({} provider)", self.provider);
        let mut line = |label: &str, cells: Vec<String>| {
            let _ = write!(s, "{label:<w0$}");
            for c in cells {
                let _ = write!(s, "{c:>w$}");
            }
            s.push('\n');
        };
        line("# Queries", self.rows.iter().map(|r| r.requested.to_string()).collect());
        line(
            "Avg. Time per Query (ms)",
            self.rows
                .iter()
                .map(|r| r.avg_ms_per_query.map_or("n/a".into(), |a| format!("{a:.3}")))
                .collect(),
        );
        line("Accepted", self.rows.iter().map(|r| r.accepted.to_string()).collect());
        line("Calls", self.rows.iter().map(|r| r.calls_made.to_string()).collect());
        s
    }
}
