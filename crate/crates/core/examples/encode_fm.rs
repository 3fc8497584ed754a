//! Parse a feature model and encode it as DIMACS CNF.
//!
//! ```text
//! cargo run --example encode_fm [-- path/to/model.fm]
//! ```

use fmreason::cnf::write_dimacs;
use fmreason::fixtures::MOBILE_FM;
use fmreason::fm::{encode_fm, parse_fm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => MOBILE_FM.to_string(),
    };
    let fm = parse_fm(&text)?;
    let (cnf, names) = encode_fm(&fm);

    println!("c {} features, {} clauses", fm.num_features(), cnf.num_clauses());
    for (i, name) in names.names().iter().enumerate() {
        println!("c {} {name}", i + 1);
    }
    print!("{}", write_dimacs(&cnf));
    Ok(())
}
