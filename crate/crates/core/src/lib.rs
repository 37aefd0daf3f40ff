//! Synthetic SQL workload generation and labeling for learned database
//! components.
//!
//! The crate covers the whole path from a schema to training data:
//!
//! - [`schema`]: catalog, desk-scale table data, per-column statistics
//!   (boundaries, seeded sample, equi-width histogram).
//! - [`sql`]: the supported SQL subset, with parser, printer, validator,
//!   canonical keys and single-edit mutation.
//! - [`generator`]: prompt construction, a pluggable generation provider
//!   (an OpenAI-compatible HTTP client or a seeded grammar mock) and batched,
//!   deduplicated workload production.
//! - [`labeler`]: exact cardinality/selectivity labels by execution, plus a
//!   Bernoulli-sampling estimator.
//! - [`planner`]: left-deep plan enumeration and cost labels with the argmin
//!   plan per query.
//! - [`metrics`]: diversity, fidelity, selectivity-by-strategy and timing
//!   reports.
//! - [`pipeline`]: config-driven orchestration behind the `forge` binary.

pub mod artifact;
pub mod dataset;
pub mod error;
pub mod generator;
pub mod labeler;
pub mod metrics;
pub mod pipeline;
pub mod planner;
pub mod schema;
pub mod seed;
pub mod sql;
pub mod value;
pub mod workload;

pub use error::{Error, Result};
