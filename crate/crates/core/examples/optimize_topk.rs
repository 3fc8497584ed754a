//! Optimization and top-k on a compiled circuit, next to the direct answers.

use fmreason::cnf::{Var, Weighting};
use fmreason::compiler::compile;
use fmreason::direct::{optimize_direct, topk_configs_direct, DirectOptions, TopKStop};
use fmreason::fixtures::MOBILE_FM;
use fmreason::fm::{encode_fm, parse_fm};
use fmreason::queries::{optimize, topk_transform, TopKMode};
use fmreason::Direction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = parse_fm(MOBILE_FM)?;
    let (cnf, names) = encode_fm(&fm);
    let circuit = compile(&cnf)?;

    // A price list: every feature costs something, GPS and the camera most.
    let mut w = Weighting::new(cnf.num_vars(), 10, 0)?;
    for (i, name) in names.names().iter().enumerate() {
        let price = match name.as_str() {
            "GPS" => 80,
            "Camera" => 60,
            "HighResolution" => 40,
            _ => 10,
        };
        w.set_weight(Var::new(i as u32 + 1), price, 0)?;
    }

    let cheap = optimize(&circuit, &w, Direction::Min)?.expect("satisfiable");
    let direct = optimize_direct(&cnf, &w, Direction::Min, &DirectOptions::default())?.expect("satisfiable");
    println!("cheapest: {} (compiled) / {} (direct)", cheap.value, direct.value);

    print!("five most expensive:\n{}", topk_transform(&circuit, &w, 5, Direction::Max, TopKMode::Configurations)?);
    print!("five cheapest price points:\n{}", topk_transform(&circuit, &w, 5, Direction::Min, TopKMode::Values)?);

    let co_optimal = topk_configs_direct(&cnf, &w, 10, Direction::Min, TopKStop::FirstValueChange, &DirectOptions::default())?;
    println!("{} configurations share the cheapest price", co_optimal.len());
    Ok(())
}
