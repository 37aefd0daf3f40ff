//! Labels a few queries with exact and sampled cardinalities.
//!
//! ```bash
//! cargo run -p forge --example label_queries -- [fraction]
//! ```

use forge::dataset::load_bundled;
use forge::labeler::{label_exact, label_sampled};
use forge::sql::parse_sql;

const QUERIES: &[&str] = &[
    "SELECT * FROM title",
    "SELECT * FROM title WHERE start_year BETWEEN 1990 AND 1999",
    "SELECT * FROM movies m, cast_info ci WHERE m.id = ci.movie_id AND m.rating >= 8",
    "SELECT * FROM persons WHERE id IN (SELECT person_id FROM cast_info WHERE role_id = 1)",
    "SELECT genre, AVG(budget) FROM movies GROUP BY genre",
    "SELECT * FROM title WHERE start_year > 2000 AND start_year < 1990",
];

fn main() -> anyhow::Result<()> {
    let fraction: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(0.1);
    let (_, db) = load_bundled()?;
    println!("{:>8} {:>12} {:>10} {:>10}  sql", "exact", "universe", "sel", "sampled");
    for sql in QUERIES {
        let q = parse_sql(sql)?;
        let exact = label_exact(&q, &db)?;
        let sampled = label_sampled(&q, &db, fraction, 11)?;
        println!(
            "{:>8} {:>12} {:>10.6} {:>9}{}  {sql}",
            exact.cardinality,
            exact.universe_size,
            exact.selectivity,
            sampled.cardinality,
            if sampled.low_confidence { "?" } else { " " }
        );
    }
    println!("? marks a low-confidence sampled estimate");
    Ok(())
}
