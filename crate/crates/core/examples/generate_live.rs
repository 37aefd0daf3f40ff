//! Generates a small workload through an OpenAI-compatible chat-completions
//! endpoint and writes the prompt/response transcripts.
//!
//! ```bash
//! FORGE_ENDPOINT=https://api.openai.com/v1/chat/completions FORGE_MODEL=gpt-4o-mini \
//! FORGE_API_KEY=sk-... cargo run -p forge --example generate_live -- [n]
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::generator::{generate_with_options, GenerateOptions, GenerationRequest, ProviderProfile};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(10);
    let (Ok(endpoint), Ok(model)) = (std::env::var("FORGE_ENDPOINT"), std::env::var("FORGE_MODEL")) else {
        println!("set FORGE_ENDPOINT and FORGE_MODEL (and FORGE_API_KEY if the endpoint needs one)");
        return Ok(());
    };
    let mut profile = ProviderProfile::live(endpoint, model);
    if std::env::var("FORGE_API_KEY").is_ok() {
        // Expanded by the provider; the key never lands in a file.
        profile.api_key = Some("${FORGE_API_KEY}".into());
    }

    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let transcripts = std::env::temp_dir().join("forge-live-transcript");
    let opts = GenerateOptions {
        transcript_dir: Some(transcripts.clone()),
        jobs: None,
    };
    let res = generate_with_options(&GenerationRequest::schema_aware(n), &profile, &catalog, &stats, &opts)?;
    for q in &res.queries {
        println!("{} ({}) {}", q.id, q.origin.label(), q.sql);
    }
    for r in &res.rejected {
        println!("rejected: {}", r.reason);
    }
    println!(
        "{} of {n} queries, {} calls ({} failed), {:.0} ms; transcripts in {}",
        res.queries.len(),
        res.calls_made,
        res.failed_calls,
        res.total_ms,
        transcripts.display()
    );
    Ok(())
}
