//! Uniform sampling from a compiled circuit, with observed frequencies.

use std::collections::BTreeMap;

use fmreason::compiler::compile;
use fmreason::fixtures::mobile_formula;
use fmreason::queries::{count_models, sample_uniform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let circuit = compile(&mobile_formula())?;
    let draws = 14_000;
    let samples = sample_uniform(&circuit, draws, 42)?;

    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for m in &samples {
        *freq.entry(m.to_string()).or_default() += 1;
    }
    println!("{} models, {draws} draws (expect about 1000 each)", count_models(&circuit));
    for (model, n) in freq {
        println!("{n:>6}  {model}");
    }
    Ok(())
}
