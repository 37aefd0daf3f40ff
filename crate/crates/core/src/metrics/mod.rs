//! Workload diversity, fidelity to a reference, selectivity by statistics
//! strategy, and generation timing.

mod diversity;
mod fidelity;
mod selectivity;
mod timing;

pub use diversity::{diversity, predicate_class, DiversityReport, PredicateClass};
pub use fidelity::{fidelity, join_edges, FidelityReport, JoinEdge};
pub use selectivity::{
    selectivity_study, SelectivityCell, SelectivityMatrix, SelectivityStudyOptions, COLUMNS, DEFAULT_MIN_BUCKET,
    DEFAULT_QUERIES_PER_CELL,
};
pub use timing::{timing_study, TimingReport, TimingRow, DEFAULT_SIZES};
