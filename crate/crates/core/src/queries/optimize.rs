//! Optimal model under a linear weighting, by one bottom-up pass.
//!
//! Infeasibility is an explicit `None` that absorbs sums, never a large
//! integer standing in for infinity.

use super::{branches, check_weighting, require_strict, root_branch, Branch, QueryError};
use crate::cnf::{Model, Var, Weighting};
use crate::ddnnf::{DdnnfCircuit, Node, NodeId};
use crate::direct::OptResult;
use crate::Direction;

/// Preferred polarity of an unconstrained variable and its weight; `false`
/// on ties.
pub(crate) fn best_free(w: &Weighting, v: u32, dir: Direction) -> (bool, i64) {
    let var = Var::new(v);
    let (p, n) = (w.pos(var), w.neg(var));
    if dir.better(p, n) {
        (true, p)
    } else {
        (false, n)
    }
}

fn branch_value(values: &[Option<i64>], w: &Weighting, b: &Branch, dir: Direction) -> Option<i64> {
    let child = values[b.child]?;
    let lit = b.lit.map_or(0, |l| w.lit_weight(l));
    let free: i64 = b.free.iter().map(|&v| best_free(w, v, dir).1).sum();
    Some(child + lit + free)
}

/// Index of the better branch; later branches win ties, so a decision
/// prefers its lo branch when both are equally good.
fn pick(values: &[Option<i64>], w: &Weighting, bs: &[Branch], dir: Direction) -> Option<(usize, i64)> {
    let mut best: Option<(usize, i64)> = None;
    for (i, b) in bs.iter().enumerate() {
        if let Some(v) = branch_value(values, w, b, dir) {
            if best.is_none_or(|(_, bv)| !dir.better(bv, v)) {
                best = Some((i, v));
            }
        }
    }
    best
}

pub fn optimize(c: &DdnnfCircuit, w: &Weighting, dir: Direction) -> Result<Option<OptResult>, QueryError> {
    require_strict(c)?;
    check_weighting(c, w)?;
    let bs: Vec<Option<Vec<Branch>>> = (0..c.num_nodes()).map(|id| branches(c, id)).collect();
    let mut values: Vec<Option<i64>> = Vec::with_capacity(c.num_nodes());
    for (id, node) in c.nodes().iter().enumerate() {
        let v = match node {
            Node::True => Some(0),
            Node::False => None,
            Node::Lit(l) => Some(w.lit_weight(*l)),
            Node::And(ch) => ch.iter().try_fold(0i64, |acc, &i| Some(acc + values[i]?)),
            Node::Decision { .. } | Node::Or(_) => {
                pick(&values, w, bs[id].as_ref().expect("disjunctive node"), dir).map(|p| p.1)
            }
        };
        values.push(v);
    }
    let root = root_branch(c);
    let Some(value) = branch_value(&values, w, &root, dir) else {
        return Ok(None);
    };
    let mut asg = vec![false; c.num_vars() as usize + 1];
    trace_branch(c, &values, &bs, w, dir, &root, &mut asg);
    let model = Model::from_bools(asg[1..].to_vec());
    debug_assert_eq!(w.value(&model), value);
    Ok(Some(OptResult { model, value }))
}

fn trace_branch(
    c: &DdnnfCircuit,
    values: &[Option<i64>],
    bs: &[Option<Vec<Branch>>],
    w: &Weighting,
    dir: Direction,
    b: &Branch,
    asg: &mut [bool],
) {
    if let Some(l) = b.lit {
        asg[l.var().index() as usize] = l.is_positive();
    }
    for &v in &b.free {
        asg[v as usize] = best_free(w, v, dir).0;
    }
    trace(c, values, bs, w, dir, b.child, asg);
}

fn trace(
    c: &DdnnfCircuit,
    values: &[Option<i64>],
    bs: &[Option<Vec<Branch>>],
    w: &Weighting,
    dir: Direction,
    id: NodeId,
    asg: &mut [bool],
) {
    match c.node(id) {
        Node::True | Node::False => {}
        Node::Lit(l) => asg[l.var().index() as usize] = l.is_positive(),
        Node::And(ch) => {
            for &i in ch {
                trace(c, values, bs, w, dir, i, asg);
            }
        }
        Node::Decision { .. } | Node::Or(_) => {
            let branches = bs[id].as_ref().expect("disjunctive node");
            let (i, _) = pick(values, w, branches, dir).expect("traced nodes are feasible");
            trace_branch(c, values, bs, w, dir, &branches[i], asg);
        }
    }
}
