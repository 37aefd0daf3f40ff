//! Regenerates the bundled IMDB-like dataset under `data/imdb/`.
//!
//! ```bash
//! cargo run -p forge --example regen_dataset
//! ```

use forge::dataset::{bundled_dir, generate_imdb, write_dataset, DatasetSize, BUNDLED_SEED};

fn main() -> anyhow::Result<()> {
    let db = generate_imdb(BUNDLED_SEED, DatasetSize::default());
    let dir = bundled_dir();
    write_dataset(&dir, &db)?;
    for t in db.iter() {
        println!("{:<16} {:>6} rows", t.table, t.row_count);
    }
    println!("written to {}", dir.display());
    Ok(())
}
