//! Uniform sampling by top-down descent weighted with model counts.
//!
//! The random source is ChaCha8 seeded through `seed_from_u64`, whose output
//! is fixed across platforms, so a seed pins the sample list.

use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{branches, node_counts, require_strict, root_branch, Branch, QueryError};
use crate::cnf::Model;
use crate::ddnnf::{DdnnfCircuit, Node, NodeId};

struct Sampler<'a> {
    circuit: &'a DdnnfCircuit,
    counts: Vec<BigUint>,
    branches: Vec<Option<Vec<Branch>>>,
}

impl Sampler<'_> {
    fn draw_branch<R: Rng>(&self, rng: &mut R, branch: &Branch, asg: &mut [bool]) {
        if let Some(l) = branch.lit {
            asg[l.var().index() as usize] = l.is_positive();
        }
        self.draw(rng, branch.child, asg);
        for &v in &branch.free {
            asg[v as usize] = rng.gen_bool(0.5);
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R, id: NodeId, asg: &mut [bool]) {
        match self.circuit.node(id) {
            Node::True => {}
            Node::False => unreachable!("sampling only descends into consistent nodes"),
            Node::Lit(l) => asg[l.var().index() as usize] = l.is_positive(),
            Node::And(children) => {
                for &ch in children {
                    self.draw(rng, ch, asg);
                }
            }
            Node::Decision { .. } | Node::Or(_) => {
                let bs = self.branches[id].as_ref().expect("disjunctive node");
                let mut pick = rng.gen_biguint_below(&self.counts[id]);
                for b in bs {
                    let weight = &self.counts[b.child] << b.free.len();
                    if pick < weight {
                        self.draw_branch(rng, b, asg);
                        return;
                    }
                    pick -= weight;
                }
                unreachable!("branch weights sum to the node count");
            }
        }
    }
}

/// `count` independent uniform samples from the models of `c`,
/// deterministic for a given `seed`.
pub fn sample_uniform(c: &DdnnfCircuit, count: usize, seed: u64) -> Result<Vec<Model>, QueryError> {
    require_strict(c)?;
    let counts = node_counts(c);
    if counts[c.root()] == BigUint::from(0u32) {
        return Err(QueryError::Inconsistent);
    }
    let sampler = Sampler {
        circuit: c,
        branches: (0..c.num_nodes()).map(|id| branches(c, id)).collect(),
        counts,
    };
    let root = root_branch(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut asg = vec![false; c.num_vars() as usize + 1];
        sampler.draw_branch(&mut rng, &root, &mut asg);
        out.push(Model::from_bools(asg[1..].to_vec()));
    }
    Ok(out)
}
