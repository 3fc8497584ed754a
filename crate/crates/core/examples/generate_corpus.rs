//! Regenerates the mini benchmark corpus.
//!
//! ```text
//! cargo run --example generate_corpus -- crates/core/corpus
//! ```
//!
//! Writes `mobile.fm` plus twenty satisfiable random feature models
//! (10 to 60 features) from a fixed seed, so the output is stable.

use std::path::PathBuf;

use fmreason::direct::{sat_direct, DirectOptions};
use fmreason::fixtures::MOBILE_FM;
use fmreason::fm::{encode_fm, random_feature_model, write_fm, RandomFmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 20;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("mobile.fm"), MOBILE_FM)?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut written = 0;
    while written < INSTANCES {
        // Sizes spread evenly over 10..=60.
        let n = 10 + written * 50 / (INSTANCES - 1);
        let constraints = rng.gen_range(1..=n / 5 + 1);
        let fm = random_feature_model(&mut rng, RandomFmParams::new(n, constraints));
        let (cnf, _) = encode_fm(&fm);
        if sat_direct(&cnf, &DirectOptions::default()).expect("no deadline").is_none() {
            continue;
        }
        let path = dir.join(format!("random_{written:02}_{n}.fm"));
        std::fs::write(&path, write_fm(&fm))?;
        println!("{} ({} clauses)", path.display(), cnf.num_clauses());
        written += 1;
    }
    Ok(())
}
