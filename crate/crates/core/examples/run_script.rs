//! Run `.win` analysis scripts. Paths inside a script are resolved against
//! the script's directory.
//!
//! ```text
//! cargo run --example run_script [-- script.win ...]
//! ```

use std::path::{Path, PathBuf};

use fmreason::script::run_script;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scripts");
    let mut scripts: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if scripts.is_empty() {
        scripts = ["analysis.win", "compiled.win", "tour.win"].iter().map(|s| dir.join(s)).collect();
    }
    for path in scripts {
        println!("== {}", path.display());
        let text = std::fs::read_to_string(&path).expect("readable script");
        let base = path.parent().unwrap_or(Path::new("."));
        if let Err(e) = run_script(&text, base, &mut std::io::stdout()) {
            eprintln!("{}: {e}", path.display());
            std::process::exit(1);
        }
    }
}
