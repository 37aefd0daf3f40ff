use std::path::Path;

use crate::artifact;
use crate::error::Result;
use crate::labeler::label::{LabelFailure, LabeledQuery};

pub const LABEL_HEADER: [&str; 8] = [
    "query_id",
    "sql",
    "category",
    "cardinality",
    "universe_size",
    "selectivity",
    "label_mode",
    "label_ms",
];

/// Renders `labels.csv`. `label_ms` is left empty unless `with_timing`, so
/// that reruns stay byte-identical.
pub fn labels_csv(seed: Option<u64>, labels: &[LabeledQuery], with_timing: bool) -> Result<Vec<u8>> {
    artifact::csv_bytes(
        seed,
        &LABEL_HEADER,
        labels.iter().map(|l| {
            [
                l.query_id.clone(),
                l.sql.clone(),
                l.category.label().to_string(),
                l.cardinality.to_string(),
                l.universe_size.to_string(),
                format!("{:?}", l.selectivity),
                l.label_mode.to_string(),
                if with_timing {
                    format!("{:.3}", l.label_ms)
                } else {
                    String::new()
                },
            ]
        }),
    )
}

pub fn failures_csv(seed: Option<u64>, failures: &[LabelFailure]) -> Result<Vec<u8>> {
    artifact::csv_bytes(
        seed,
        &["query_id", "sql", "error"],
        failures
            .iter()
            .map(|f| [f.query_id.clone(), f.sql.clone(), f.error.clone()]),
    )
}

pub fn write_labels(dir: &Path, seed: Option<u64>, labels: &[LabeledQuery], with_timing: bool) -> Result<()> {
    artifact::write_atomic(&dir.join("labels.csv"), &labels_csv(seed, labels, with_timing)?)?;
    artifact::write_json(&dir.join("labels.json"), &labels)
}
