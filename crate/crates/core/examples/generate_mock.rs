//! Generates schema-aware, context-aware and expansion workloads with the
//! seeded mock provider.
//!
//! ```bash
//! cargo run -p forge --example generate_mock -- [seed]
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::generator::{build_prompt, expand_workload, generate_workload, GenerationRequest, ProviderProfile};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};
use forge::sql::{parse_sql, QueryCategory};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1);
    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let profile = ProviderProfile::mock(seed);

    let mixed = GenerationRequest::schema_aware(9).with_mix([
        (QueryCategory::SimpleSelection, 3),
        (QueryCategory::ComplexJoin, 3),
        (QueryCategory::Aggregation, 3),
    ]);
    let prompt = build_prompt(&mixed, &catalog, &stats);
    println!("prompt starts with:\n{}\n", prompt.lines().take(6).collect::<Vec<_>>().join("\n"));

    let res = generate_workload(&mixed, &profile, &catalog, &stats)?;
    println!("schema-aware: {} queries in {} calls", res.queries.len(), res.calls_made);
    for q in &res.queries {
        println!("  {} [{}] {}", q.id, q.category, q.sql);
    }

    let accountant = GenerationRequest::context_aware(5, "Generate a workload of an accountant of movies.");
    let res = generate_workload(&accountant, &profile, &catalog, &stats)?;
    println!("\ncontext-aware:");
    for q in &res.queries {
        println!("  {}", q.sql);
    }

    let seeds = vec![
        parse_sql("SELECT * FROM movies WHERE budget > 1000000")?,
        parse_sql("SELECT * FROM movies WHERE rating BETWEEN 5 AND 7")?,
    ];
    let res = expand_workload(&seeds, 6, &profile, &catalog, &stats)?;
    println!("\nexpansion of 2 seeds:");
    for q in &res.queries {
        println!("  ({}) {}", q.origin.label(), q.sql);
    }
    for n in &res.notices {
        println!("  note: {n}");
    }
    Ok(())
}
