//! Computes per-column statistics over the bundled dataset and prints the
//! three slices a prompt can carry for one column: boundaries, a sample and
//! the equi-width histogram.
//!
//! ```bash
//! cargo run -p forge --example statistics -- [table.column]
//! ```

use forge::dataset::{load_bundled, BUNDLED_SEED};
use forge::schema::{compute_database_statistics, ColumnRef, DEFAULT_BUCKET_COUNT, DEFAULT_SAMPLE_SIZE};

fn main() -> anyhow::Result<()> {
    let column: ColumnRef = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "title.start_year".into())
        .parse()
        .map_err(anyhow::Error::msg)?;

    let (catalog, db) = load_bundled()?;
    for t in &catalog.tables {
        let rows = db.get(&t.name).map_or(0, |d| d.row_count);
        println!("{:<16} {:>6} rows  {} columns", t.name, rows, t.columns.len());
    }

    let stats = compute_database_statistics(&db, DEFAULT_SAMPLE_SIZE, DEFAULT_BUCKET_COUNT, BUNDLED_SEED)?;
    let s = stats
        .get(&column)
        .ok_or_else(|| anyhow::anyhow!("no statistics for {column}"))?;
    println!("\n{column}: {} rows, {} distinct", s.row_count, s.distinct_count);
    if let (Some(min), Some(max)) = (&s.min, &s.max) {
        println!("boundaries  [{min}, {max}]");
    }
    let head: Vec<String> = s.sample.iter().take(12).map(|v| v.to_string()).collect();
    println!("sample      {} values, first: {}", s.sample.len(), head.join(", "));
    println!("histogram   {} buckets", s.histogram.len());
    let peak = s.histogram.iter().map(|b| b.frequency).max().unwrap_or(1).max(1);
    for b in &s.histogram {
        let bar = "#".repeat((40 * b.frequency).div_ceil(peak));
        println!("  [{:>8.1}, {:>8.1})  {:>5}  {bar}", b.lo, b.hi, b.frequency);
    }
    Ok(())
}
