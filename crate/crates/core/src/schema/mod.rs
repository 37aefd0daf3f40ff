//! Schema model, desk-scale table data and per-column statistics.

mod catalog;
mod data;
pub(crate) mod stats;

pub use catalog::{ColumnDef, ColumnRef, ForeignKey, SchemaCatalog, TableDef};
pub use data::{load_table_data, Database, TableData};
pub use stats::{
    compute_database_statistics, compute_statistics, ColumnStatistics, HistogramBucket, StatsMap,
    DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE,
};
