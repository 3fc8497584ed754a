//! Feature-model reasoning over two representations: CNF handled by an
//! incremental SAT engine, and Decision-DNNF circuits compiled from CNF.
//!
//! Both pipelines share the same inputs (feature models, DIMACS, weightings)
//! so their answers can be cross-checked.
//!
//! The `examples/` directory walks through each capability:
//!
//! - `encode_fm`: feature model text to DIMACS
//! - `direct_analysis`: SAT, enumeration, optimization and top-k on CNF
//! - `compile_and_count`: compilation, the canonical circuit format, counting
//! - `sampling`: seeded uniform sampling
//! - `optimize_topk`: weighted optimization and top-k on a circuit
//! - `c2d_import`: reading and validating c2d output
//! - `run_script`: the analysis scripts in `examples/scripts`
//! - `bench`: both approaches over the bundled corpus
//! - `generate_corpus`: regenerates that corpus
//!
//! ```
//! use fmreason::compiler::compile;
//! use fmreason::fm::{encode_fm, parse_fm};
//! use fmreason::queries::count_models;
//!
//! let fm = parse_fm("Phone\n  Camera [optional]\n  Screen [mandatory]\n").unwrap();
//! let (cnf, _names) = encode_fm(&fm);
//! assert_eq!(count_models(&compile(&cnf).unwrap()).to_string(), "2");
//! ```

pub mod bench;
pub mod cli;
pub mod cnf;
pub mod compiler;
pub mod ddnnf;
pub mod deadline;
pub mod direct;
pub mod fixtures;
pub mod fm;
pub mod queries;
pub mod sat;
pub mod script;

/// How many results an enumeration should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    All,
    First(usize),
}

impl Limit {
    pub fn allows(self, produced: usize) -> bool {
        match self {
            Limit::All => true,
            Limit::First(k) => produced < k,
        }
    }
}

/// Optimization direction for objective queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    /// True if `a` is strictly preferred over `b`.
    pub fn better(self, a: i64, b: i64) -> bool {
        match self {
            Direction::Min => a < b,
            Direction::Max => a > b,
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "min" => Some(Direction::Min),
            "max" => Some(Direction::Max),
            _ => None,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Min => "min",
            Direction::Max => "max",
        })
    }
}
