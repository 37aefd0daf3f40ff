//! Parses, prints, validates and mutates queries of the supported SQL subset.
//!
//! ```bash
//! cargo run -p forge --example sql_tools -- "SELECT * FROM movies WHERE rating > 8"
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::schema::{compute_database_statistics, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};
use forge::sql::{canonical_key, mutate_query, parse_sql, print_sql, skeleton_key, validate, Dialect, QueryCategory};

const DEFAULT_SQL: &str = "select m.genre, count(*) from movies m, title t \
     where m.title_id = t.id and t.start_year between 1990 and 1999 and m.rating >= 7.5 \
     group by m.genre";

fn main() -> anyhow::Result<()> {
    let sql = std::env::args().nth(1).unwrap_or_else(|| DEFAULT_SQL.into());
    let (catalog, db) = load_bundled()?;
    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;

    let q = match parse_sql(&sql) {
        Ok(q) => q,
        Err(e) => {
            println!("parse error: {e}");
            return Ok(());
        }
    };
    println!("category   {}", QueryCategory::of(&q));
    println!("generic    {}", print_sql(&q, Dialect::Generic));
    println!("postgres   {}", print_sql(&q, Dialect::PostgresLike));
    println!("canonical  {}", canonical_key(&q));
    println!("template   {}", skeleton_key(&q));

    let report = validate(&q, &catalog);
    if report.violations.is_empty() {
        println!("validation clean");
    }
    for v in &report.violations {
        println!("validation {v}");
    }

    let outcome = mutate_query(&q, &catalog, &stats, 7, 4);
    for m in &outcome.variants {
        println!("{:<20} {}", format!("{:?}", m.edit), print_sql(&m.query, Dialect::Generic));
    }
    if let Some(n) = &outcome.notice {
        println!("mutation notice: {n}");
    }
    Ok(())
}
