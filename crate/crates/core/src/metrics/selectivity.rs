use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{
    generate_workload, GenerationRequest, PredicateKind, ProviderProfile, SelectivityLevel, SelectivityTarget,
    StatsStrategy,
};
use crate::labeler::label_exact;
use crate::schema::{ColumnRef, Database, SchemaCatalog, StatsMap};
use crate::seed;

pub const DEFAULT_QUERIES_PER_CELL: usize = 20;
pub const DEFAULT_MIN_BUCKET: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectivityStudyOptions {
    pub queries_per_cell: usize,
    /// Cells averaging fewer labeled queries are marked sparse.
    pub min_bucket: usize,
    pub target_columns: Vec<ColumnRef>,
    pub seed: u64,
    pub jobs: Option<usize>,
}

impl Default for SelectivityStudyOptions {
    fn default() -> Self {
        Self {
            queries_per_cell: DEFAULT_QUERIES_PER_CELL,
            min_bucket: DEFAULT_MIN_BUCKET,
            target_columns: vec![ColumnRef::new("title", "start_year")],
            seed: 0,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivityCell {
    pub strategy: StatsStrategy,
    pub predicate_kind: PredicateKind,
    pub level: SelectivityLevel,
    pub requested: usize,
    pub generated: usize,
    pub labeled: usize,
    /// Mean exact selectivity; absent when nothing was labeled.
    pub mean_selectivity: Option<f64>,
    pub sparse: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivityMatrix {
    pub target_columns: Vec<ColumnRef>,
    pub queries_per_cell: usize,
    pub min_bucket: usize,
    /// Row-major: strategies in order, then equality (non-selective,
    /// selective), then inequality (non-selective, selective).
    pub cells: Vec<SelectivityCell>,
}

/// Column order of the printed table.
pub const COLUMNS: [(PredicateKind, SelectivityLevel); 4] = [
    (PredicateKind::EqualityOnly, SelectivityLevel::NonSelective),
    (PredicateKind::EqualityOnly, SelectivityLevel::Selective),
    (PredicateKind::InequalityOnly, SelectivityLevel::NonSelective),
    (PredicateKind::InequalityOnly, SelectivityLevel::Selective),
];

/// Generates and exactly labels `queries_per_cell` predicates for every
/// (strategy, predicate kind, level) cell and averages their selectivity.
pub fn selectivity_study(
    catalog: &SchemaCatalog,
    db: &Database,
    stats: &StatsMap,
    profile: &ProviderProfile,
    opts: &SelectivityStudyOptions,
) -> Result<SelectivityMatrix> {
    if opts.queries_per_cell == 0 {
        return Err(Error::Precondition("queries_per_cell must be at least 1".into()));
    }
    if opts.target_columns.is_empty() {
        return Err(Error::Precondition("selectivity study needs at least one target column".into()));
    }
    let cells: Vec<(usize, StatsStrategy, PredicateKind, SelectivityLevel)> = StatsStrategy::ALL
        .iter()
        .flat_map(|s| COLUMNS.iter().map(move |(k, l)| (*s, *k, *l)))
        .enumerate()
        .map(|(i, (s, k, l))| (i, s, k, l))
        .collect();
    let base = seed::sub_seed(opts.seed, "selectivity_study");
    let run_cell = |&(i, strategy, kind, level): &(usize, StatsStrategy, PredicateKind, SelectivityLevel)| {
        let mut cell = SelectivityCell {
            strategy,
            predicate_kind: kind,
            level,
            requested: opts.queries_per_cell,
            generated: 0,
            labeled: 0,
            mean_selectivity: None,
            sparse: true,
            notes: Vec::new(),
        };
        let mut target = SelectivityTarget::new(level, kind);
        target.target_columns = opts.target_columns.clone();
        let req = GenerationRequest::selectivity(opts.queries_per_cell, target, strategy);
        let mut cell_profile = profile.clone();
        cell_profile.seed = seed::indexed_seed(base, i as u64);
        match generate_workload(&req, &cell_profile, catalog, stats) {
            Ok(res) => {
                cell.generated = res.queries.len();
                let mut total = 0.0;
                for wq in &res.queries {
                    match label_exact(&wq.ast, db) {
                        Ok(l) => {
                            total += l.selectivity;
                            cell.labeled += 1;
                        }
                        Err(e) => cell.notes.push(format!("{}: {e}", wq.id)),
                    }
                }
                if cell.labeled > 0 {
                    cell.mean_selectivity = Some(total / cell.labeled as f64);
                }
                if res.incomplete {
                    cell.notes.push(format!("generated {} of {}", res.queries.len(), opts.queries_per_cell));
                }
            }
            Err(e) => cell.notes.push(e.to_string()),
        }
        cell.sparse = cell.labeled < opts.min_bucket;
        cell
    };
    let work = || cells.par_iter().map(run_cell).collect::<Vec<_>>();
    let cells = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| work()),
        None => work(),
    };
    Ok(SelectivityMatrix {
        target_columns: opts.target_columns.clone(),
        queries_per_cell: opts.queries_per_cell,
        min_bucket: opts.min_bucket,
        cells,
    })
}

impl SelectivityMatrix {
    pub fn cell(&self, strategy: StatsStrategy, kind: PredicateKind, level: SelectivityLevel) -> Option<&SelectivityCell> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.predicate_kind == kind && c.level == level)
    }

    pub fn mean(&self, strategy: StatsStrategy, kind: PredicateKind, level: SelectivityLevel) -> Option<f64> {
        self.cell(strategy, kind, level).and_then(|c| c.mean_selectivity)
    }

    pub fn has_sparse_cells(&self) -> bool {
        self.cells.iter().any(|c| c.sparse)
    }

    /// Aligned text table: one row per strategy, columns grouped by predicate kind.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let w0 = 22;
        let w = 15;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Avg. selectivity for different query types ({} queries per cell)",
            self.queries_per_cell
        );
        let groups = format!(
            "{:<w0$}{:^w2$}{:^w2$}",
            "",
            "Equality Predicates Only",
            "Inequality Predicates Only",
            w2 = 2 * w
        );
        let _ = writeln!(s, "{}", groups.trim_end());
        let _ = writeln!(
            s,
            "{:<w0$}{:>w$}{:>w$}{:>w$}{:>w$}",
            "Given to the Model", "Non-Selective", "Selective", "Non-Selective", "Selective"
        );
        let _ = writeln!(s, "{}", "-".repeat(w0 + 4 * w));
        for strategy in StatsStrategy::ALL {
            let _ = write!(s, "{:<w0$}", strategy.label());
            for (kind, level) in COLUMNS {
                let text = match self.cell(strategy, kind, level) {
                    Some(c) => {
                        let v = c.mean_selectivity.map_or("n/a".to_string(), |m| format!("{m:.5}"));
                        if c.sparse {
                            format!("{v}*")
                        } else {
                            v
                        }
                    }
                    None => "n/a".into(),
                };
                let _ = write!(s, "{text:>w$}");
            }
            s.push('\n');
        }
        if self.has_sparse_cells() {
            let _ = writeln!(s, "* fewer than {} labeled queries in the cell", self.min_bucket);
        }
        s
    }
}
