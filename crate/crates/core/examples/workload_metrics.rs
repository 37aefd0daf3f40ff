//! Diversity of a generated workload and its fidelity to a seed workload.
//!
//! ```bash
//! cargo run -p forge --example workload_metrics -- [seed]
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::generator::{expand_workload, generate_workload, GenerationRequest, ProviderProfile};
use forge::metrics::{diversity, fidelity};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};
use forge::sql::parse_sql;

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1);
    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let profile = ProviderProfile::mock(seed);

    let corpus = generate_workload(&GenerationRequest::schema_aware(200), &profile, &catalog, &stats)?.asts();
    print!("{}", diversity(&corpus, &catalog).render_text());

    let seeds: Vec<_> = [
        "SELECT * FROM movies WHERE budget > 1000000",
        "SELECT * FROM title t, movies m WHERE m.title_id = t.id AND t.start_year >= 1990",
        "SELECT m.genre, COUNT(*) FROM movies m GROUP BY m.genre",
    ]
    .iter()
    .map(|s| parse_sql(s))
    .collect::<Result<_, _>>()?;
    let expanded = expand_workload(&seeds, 30, &profile, &catalog, &stats)?.asts();
    println!("\nExpansion of 3 seeds to 30 queries, against the seeds");
    print!("{}", fidelity(&expanded, &seeds, &catalog)?.render_text());
    println!("\nGeneral workload against the same seeds");
    print!("{}", fidelity(&corpus, &seeds, &catalog)?.render_text());
    Ok(())
}
