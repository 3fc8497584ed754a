//! Queries over compiled circuits: consistency, counting, enumeration,
//! uniform sampling, optimization and top-k.
//!
//! Variables of the universe that do not occur below a node are free at that
//! node. Every query accounts for them explicitly ("smoothing"): factor two
//! per free variable when counting, both polarities when enumerating, the
//! cheaper polarity when optimizing.

mod enumerate;
mod optimize;
mod sample;
mod topk;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{Lit, Weighting};
use crate::ddnnf::{DdnnfCircuit, Node, NodeId};

pub use enumerate::{enumerate_models, ModelIter};
pub use optimize::optimize;
pub use sample::sample_uniform;
pub use topk::{topk_transform, TopKEntries, TopKList, TopKMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("weighting covers {weights} variables but the circuit has {circuit}")]
    WeightingSize { weights: u32, circuit: u32 },
    #[error("the circuit has no models")]
    Inconsistent,
    #[error("this query needs a Decision-DNNF; the circuit has general OR nodes")]
    NotDecisionDnnf,
    #[error("k must be at least 1")]
    ZeroK,
}

pub(crate) fn require_strict(c: &DdnnfCircuit) -> Result<(), QueryError> {
    if c.is_strict() {
        Ok(())
    } else {
        Err(QueryError::NotDecisionDnnf)
    }
}

pub(crate) fn check_weighting(c: &DdnnfCircuit, w: &Weighting) -> Result<(), QueryError> {
    if w.num_vars() != c.num_vars() {
        return Err(QueryError::WeightingSize {
            weights: w.num_vars(),
            circuit: c.num_vars(),
        });
    }
    Ok(())
}

/// Sorted `a \ b` for sorted inputs, also dropping `skip`.
fn difference(a: &[u32], b: &[u32], skip: Option<u32>) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().saturating_sub(b.len()));
    let mut j = 0;
    for &v in a {
        while j < b.len() && b[j] < v {
            j += 1;
        }
        if (j < b.len() && b[j] == v) || Some(v) == skip {
            continue;
        }
        out.push(v);
    }
    out
}

/// One way of satisfying a disjunctive node: an optional decision literal,
/// the child, and the node's variables that neither mentions.
#[derive(Debug, Clone)]
pub(crate) struct Branch {
    pub lit: Option<Lit>,
    pub child: NodeId,
    pub free: Vec<u32>,
}

/// Branches of a decision or OR node (hi before lo); `None` for other kinds.
pub(crate) fn branches(c: &DdnnfCircuit, id: NodeId) -> Option<Vec<Branch>> {
    let scope = c.vars(id);
    match c.node(id) {
        Node::Decision { var, hi, lo } => Some(
            [(var.positive(), *hi), (var.negative(), *lo)]
                .into_iter()
                .map(|(lit, child)| Branch {
                    lit: Some(lit),
                    child,
                    free: difference(scope, c.vars(child), Some(var.index())),
                })
                .collect(),
        ),
        Node::Or(children) => Some(
            children
                .iter()
                .map(|&child| Branch {
                    lit: None,
                    child,
                    free: difference(scope, c.vars(child), None),
                })
                .collect(),
        ),
        _ => None,
    }
}

/// The root seen as a single branch extended by the globally free variables.
pub(crate) fn root_branch(c: &DdnnfCircuit) -> Branch {
    let all: Vec<u32> = (1..=c.num_vars()).collect();
    Branch {
        lit: None,
        child: c.root(),
        free: difference(&all, c.vars(c.root()), None),
    }
}

/// Per-node satisfiability, bottom-up.
pub(crate) fn node_consistency(c: &DdnnfCircuit) -> Vec<bool> {
    let mut ok = vec![false; c.num_nodes()];
    for (id, node) in c.nodes().iter().enumerate() {
        ok[id] = match node {
            Node::True | Node::Lit(_) => true,
            Node::False => false,
            Node::And(ch) => ch.iter().all(|&i| ok[i]),
            Node::Or(ch) => ch.iter().any(|&i| ok[i]),
            Node::Decision { hi, lo, .. } => ok[*hi] || ok[*lo],
        };
    }
    ok
}

pub fn is_consistent(c: &DdnnfCircuit) -> bool {
    node_consistency(c)[c.root()]
}

/// Model counts of every node over its own variable set.
pub(crate) fn node_counts(c: &DdnnfCircuit) -> Vec<BigUint> {
    let mut mc: Vec<BigUint> = Vec::with_capacity(c.num_nodes());
    for (id, node) in c.nodes().iter().enumerate() {
        let value = match node {
            Node::True | Node::Lit(_) => BigUint::from(1u32),
            Node::False => BigUint::from(0u32),
            Node::And(ch) => ch.iter().fold(BigUint::from(1u32), |acc, &i| acc * &mc[i]),
            Node::Decision { .. } | Node::Or(_) => branches(c, id)
                .expect("disjunctive node")
                .iter()
                .map(|b| &mc[b.child] << b.free.len())
                .sum(),
        };
        mc.push(value);
    }
    mc
}

/// Number of models over the whole universe `1..=num_vars`.
pub fn count_models(c: &DdnnfCircuit) -> BigUint {
    let mc = node_counts(c);
    let root = root_branch(c);
    &mc[root.child] << root.free.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::CnfFormula;
    use crate::compiler::compile;
    use crate::ddnnf::parse_canonical;
    use crate::fixtures::{mobile_formula, mobile_circuit};

    #[test]
    fn consistency() {
        let f = DdnnfCircuit::new(vec![Node::False], 0, 0).unwrap();
        assert!(!is_consistent(&f));
        assert!(is_consistent(&compile(&mobile_formula()).unwrap()));
        let unsat = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        assert!(!is_consistent(&compile(&unsat).unwrap()));
    }

    #[test]
    fn counting_examples() {
        let t = parse_canonical("ddnnf 1 0 3\nT\n").unwrap();
        assert_eq!(count_models(&t), BigUint::from(8u32));
        assert_eq!(count_models(&compile(&mobile_formula()).unwrap()), BigUint::from(14u32));
        assert_eq!(count_models(&mobile_circuit()), BigUint::from(14u32));
        let d = parse_canonical("ddnnf 3 2 2\nL 2\nL -2\nD 1 0 1\n").unwrap();
        assert_eq!(count_models(&d), BigUint::from(2u32));
    }

    #[test]
    fn counting_smooths_decision_gaps() {
        // x1 ? x2 : true over {1, 2, 3}: 1 * 2 (x3) + 2 * 2 = 6
        let c = parse_canonical("ddnnf 3 2 3\nL 2\nT\nD 1 0 1\n").unwrap();
        assert_eq!(count_models(&c), BigUint::from(6u32));
    }

    #[test]
    fn counting_handles_permissive_or() {
        let c = crate::ddnnf::parse_c2d_nnf(
            "nnf 5 4 2\nL 1\nL -1\nL 2\nA 2 1 2\nO 0 2 0 3\n",
            crate::ddnnf::C2dMode::Permissive,
        )
        .unwrap();
        // x1 or (-x1 and x2): 2 + 1
        assert_eq!(count_models(&c), BigUint::from(3u32));
    }

    #[test]
    fn difference_helper() {
        assert_eq!(difference(&[1, 2, 3, 5], &[2, 5], Some(1)), vec![3]);
        assert_eq!(difference(&[], &[1], None), Vec::<u32>::new());
    }
}
