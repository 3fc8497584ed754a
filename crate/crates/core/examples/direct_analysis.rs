//! Analyses answered straight from the CNF with the built-in SAT solver:
//! one configuration, a few configurations, an optimum and the top values.

use fmreason::cnf::Weighting;
use fmreason::direct::{enumerate_direct, optimize_direct, sat_direct, topk_values_direct, DirectOptions};
use fmreason::fixtures::MOBILE_FM;
use fmreason::fm::{encode_fm, parse_fm};
use fmreason::{Direction, Limit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (cnf, names) = encode_fm(&parse_fm(MOBILE_FM)?);
    let opts = DirectOptions::default();

    let model = sat_direct(&cnf, &opts)?.expect("the phone model is not void");
    let selected: Vec<&str> = model
        .lits()
        .filter(|l| l.is_positive())
        .map(|l| names.names()[l.var().slot()].as_str())
        .collect();
    println!("a configuration: {}", selected.join(", "));

    for m in enumerate_direct(&cnf, Limit::First(3), &opts)? {
        println!("  {m}");
    }

    // Cost 1 per selected feature: the smallest products.
    let w = Weighting::unit_positive(cnf.num_vars())?;
    let best = optimize_direct(&cnf, &w, Direction::Min, &opts)?.expect("satisfiable");
    println!("fewest features: {} ({})", best.value, best.model);
    println!("three smallest sizes: {:?}", topk_values_direct(&cnf, &w, 3, Direction::Min, &opts)?);
    Ok(())
}
