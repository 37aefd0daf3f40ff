//! Times schema-aware generation for several workload sizes and prints the
//! per-query averages.
//!
//! ```bash
//! cargo run -p forge --example timing_study -- [seed]
//! ```
//!
//! With `FORGE_ENDPOINT` and `FORGE_MODEL` set the live provider is timed
//! instead of the mock.

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::generator::ProviderProfile;
use forge::metrics::{timing_study, DEFAULT_SIZES};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1);
    let profile = match (std::env::var("FORGE_ENDPOINT"), std::env::var("FORGE_MODEL")) {
        (Ok(endpoint), Ok(model)) => {
            let mut p = ProviderProfile::live(endpoint, model);
            p.api_key = std::env::var("FORGE_API_KEY").ok().map(|_| "${FORGE_API_KEY}".to_string());
            p
        }
        _ => ProviderProfile::mock(seed),
    };
    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let report = timing_study(&profile, &catalog, &stats, &DEFAULT_SIZES)?;
    print!("{}", report.render_text());
    Ok(())
}
