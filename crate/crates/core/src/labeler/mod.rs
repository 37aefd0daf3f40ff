//! Exact and sampled cardinality/selectivity labels by query execution.
//!
//! The selectivity of a query is `cardinality / universe_size`, where the
//! universe is the cartesian product of the FROM tables. Aggregation queries
//! are labeled with their group count.

pub(crate) mod exec;
mod export;
mod label;

pub use export::{failures_csv, labels_csv, write_labels, LABEL_HEADER};
pub use label::{
    execute_count, label_exact, label_sampled, label_with, label_workload, LabelFailure, LabelMode,
    LabelRun, LabeledQuery, LOW_CONFIDENCE_MIN_COUNT,
};
