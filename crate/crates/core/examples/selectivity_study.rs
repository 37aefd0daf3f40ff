//! Runs the selectivity-by-strategy study with the seeded mock provider and
//! prints the matrix.
//!
//! ```bash
//! cargo run -p forge --example selectivity_study -- [queries_per_cell] [seed]
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::generator::ProviderProfile;
use forge::metrics::{selectivity_study, SelectivityStudyOptions};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let per_cell: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(20);
    let seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1);

    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let opts = SelectivityStudyOptions {
        queries_per_cell: per_cell,
        seed,
        ..Default::default()
    };
    let matrix = selectivity_study(&catalog, &db, &stats, &ProviderProfile::mock(seed), &opts)?;
    print!("{}", matrix.render_text());
    for c in matrix.cells.iter().filter(|c| !c.notes.is_empty()) {
        println!("{:?}/{:?}/{:?}: {}", c.strategy, c.predicate_kind, c.level, c.notes.join("; "));
    }
    Ok(())
}
