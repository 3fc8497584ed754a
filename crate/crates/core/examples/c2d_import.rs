//! Read a c2d `.nnf` circuit, check it, and query it.

use fmreason::ddnnf::{parse_c2d_nnf, C2dMode};
use fmreason::queries::count_models;

// (x1 and x2) or (-x1 and x3), written as c2d prints a decision on x1.
const DECISION: &str = "\
nnf 7 6 3
L 1
L 2
A 2 0 1
L -1
L 3
A 2 3 4
O 1 2 2 5
";

// A disjunction c2d would never emit: overlapping branches, no decision var.
const PLAIN_OR: &str = "\
nnf 3 2 2
L 1
L 2
O 0 2 0 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = parse_c2d_nnf(DECISION, C2dMode::Strict)?;
    println!("decision circuit: {} ({} models over 3 vars)", c.validate(), count_models(&c));

    match parse_c2d_nnf(PLAIN_OR, C2dMode::Strict) {
        Ok(_) => unreachable!("strict mode needs decisions"),
        Err(e) => println!("strict: {e}"),
    }
    let loose = parse_c2d_nnf(PLAIN_OR, C2dMode::Permissive)?;
    println!("permissive: {}", loose.validate());
    Ok(())
}
