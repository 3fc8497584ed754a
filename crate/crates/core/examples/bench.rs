//! Benchmark both approaches on the bundled corpus and print the report.
//!
//! ```text
//! cargo run --release --example bench [-- corpus_dir]
//! ```

use std::path::PathBuf;
use std::time::Duration;

use fmreason::bench::{run_bench, BenchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus"));
    let mut cfg = BenchConfig::new(corpus);
    cfg.timeout = Duration::from_secs(10);
    cfg.functions = 3;

    let report = run_bench(&cfg)?;
    print!("{report}");
    let disagreements = report.disagreements();
    if !disagreements.is_empty() {
        eprintln!("disagreements: {disagreements:?}");
    }
    Ok(())
}
