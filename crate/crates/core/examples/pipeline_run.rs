//! Runs the bundled mock config end to end and lists the artifacts.
//!
//! ```bash
//! cargo run -p forge --example pipeline_run -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use forge::pipeline::{run_pipeline, RunConfig};

fn main() -> anyhow::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join("mock.json");
    let mut cfg = RunConfig::load(&config)?;
    if let Some(out) = std::env::args().nth(1) {
        cfg.output_dir = PathBuf::from(out);
    }
    let outcome = run_pipeline(&cfg)?;
    for s in &outcome.stages {
        println!("{:<9} {}", s.stage.name(), s.notes.join("; "));
    }
    let mut files = Vec::new();
    collect(&cfg.output_dir, &mut files)?;
    files.sort();
    for f in files {
        let size = std::fs::metadata(&f)?.len();
        println!("{:>9} bytes  {}", size, f.strip_prefix(&cfg.output_dir).unwrap_or(&f).display());
    }
    Ok(())
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}
