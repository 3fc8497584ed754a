//! Compile a CNF into a Decision-DNNF, print it in the canonical format and
//! answer counting and enumeration queries on it.
//!
//! ```text
//! cargo run --example compile_and_count [-- path/to/formula.cnf]
//! ```

use fmreason::cnf::parse_dimacs;
use fmreason::compiler::compile;
use fmreason::ddnnf::write_canonical;
use fmreason::fixtures::MOBILE_DIMACS;
use fmreason::queries::{count_models, enumerate_models};
use fmreason::Limit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => MOBILE_DIMACS.to_string(),
    };
    let cnf = parse_dimacs(&text)?;
    let circuit = compile(&cnf)?;
    assert!(circuit.validate().is_valid());

    print!("{}", write_canonical(&circuit)?);
    println!(
        "{} nodes, {} edges, {} models",
        circuit.num_nodes(),
        circuit.num_edges(),
        count_models(&circuit)
    );
    for m in enumerate_models(&circuit, Limit::First(5))? {
        println!("  {m}");
    }
    Ok(())
}
