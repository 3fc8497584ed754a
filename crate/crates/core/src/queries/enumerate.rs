//! Streaming model enumeration with polynomial delay.
//!
//! Order: AND nodes behave like an odometer over their children (last child
//! fastest); disjunctive nodes list the hi branch before the lo branch; within
//! a branch the child's models are the outer loop and the branch's free
//! variables the inner one, counted in binary with the lowest index most
//! significant and `false` first.

use super::{branches, node_consistency, require_strict, root_branch, Branch, QueryError};
use crate::cnf::Model;
use crate::ddnnf::{DdnnfCircuit, Node, NodeId};
use crate::Limit;

struct Ctx<'a> {
    circuit: &'a DdnnfCircuit,
    consistent: Vec<bool>,
}

enum Cursor {
    /// True or a literal: exactly one partial model.
    Unit,
    And(Vec<(NodeId, Cursor)>),
    Alt(AltCursor),
}

struct AltCursor {
    branches: Vec<Branch>,
    idx: usize,
    sub: Box<Cursor>,
}

fn open(ctx: &Ctx, id: NodeId, asg: &mut [bool]) -> Option<Cursor> {
    if !ctx.consistent[id] {
        return None;
    }
    match ctx.circuit.node(id) {
        Node::False => None,
        Node::True => Some(Cursor::Unit),
        Node::Lit(l) => {
            asg[l.var().index() as usize] = l.is_positive();
            Some(Cursor::Unit)
        }
        Node::And(children) => {
            let mut cs = Vec::with_capacity(children.len());
            for &ch in children {
                cs.push((ch, open(ctx, ch, asg)?));
            }
            Some(Cursor::And(cs))
        }
        Node::Decision { .. } | Node::Or(_) => {
            let bs = branches(ctx.circuit, id).expect("disjunctive node");
            open_branches(ctx, bs, 0, asg).map(Cursor::Alt)
        }
    }
}

/// Positions on the first model of the first consistent branch at or after `from`.
fn open_branches(ctx: &Ctx, branches: Vec<Branch>, from: usize, asg: &mut [bool]) -> Option<AltCursor> {
    for idx in from..branches.len() {
        let b = &branches[idx];
        if !ctx.consistent[b.child] {
            continue;
        }
        if let Some(l) = b.lit {
            asg[l.var().index() as usize] = l.is_positive();
        }
        let sub = open(ctx, b.child, asg).expect("consistent child has a model");
        for &v in &b.free {
            asg[v as usize] = false;
        }
        return Some(AltCursor {
            branches,
            idx,
            sub: Box::new(sub),
        });
    }
    None
}

impl Cursor {
    fn advance(&mut self, ctx: &Ctx, asg: &mut [bool]) -> bool {
        match self {
            Cursor::Unit => false,
            Cursor::And(cs) => {
                for i in (0..cs.len()).rev() {
                    if cs[i].1.advance(ctx, asg) {
                        for entry in cs.iter_mut().skip(i + 1) {
                            entry.1 = open(ctx, entry.0, asg).expect("consistent child has a model");
                        }
                        return true;
                    }
                }
                false
            }
            Cursor::Alt(alt) => {
                let free = &alt.branches[alt.idx].free;
                for &v in free.iter().rev() {
                    let slot = &mut asg[v as usize];
                    if !*slot {
                        *slot = true;
                        return true;
                    }
                    *slot = false;
                }
                if alt.sub.advance(ctx, asg) {
                    return true;
                }
                let bs = std::mem::take(&mut alt.branches);
                match open_branches(ctx, bs, alt.idx + 1, asg) {
                    Some(next) => {
                        *alt = next;
                        true
                    }
                    None => false,
                }
            }
        }
    }
}

enum State {
    Fresh,
    Running(Cursor),
    Done,
}

/// Iterator over the models of a circuit; see [`enumerate_models`].
pub struct ModelIter<'a> {
    ctx: Ctx<'a>,
    asg: Vec<bool>,
    state: State,
    limit: Limit,
    produced: usize,
}

impl Iterator for ModelIter<'_> {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if !self.limit.allows(self.produced) {
            return None;
        }
        let found = match std::mem::replace(&mut self.state, State::Done) {
            State::Done => return None,
            State::Fresh => {
                let root = root_branch(self.ctx.circuit);
                open_branches(&self.ctx, vec![root], 0, &mut self.asg).map(Cursor::Alt)
            }
            State::Running(mut c) => c.advance(&self.ctx, &mut self.asg).then_some(c),
        };
        let c = found?;
        self.state = State::Running(c);
        self.produced += 1;
        Some(Model::from_bools(self.asg[1..].to_vec()))
    }
}

/// Lazily enumerates distinct models over `1..=num_vars`, stopping after
/// `limit` models. The delay between two models is polynomial in the
/// circuit size.
pub fn enumerate_models(c: &DdnnfCircuit, limit: Limit) -> Result<ModelIter<'_>, QueryError> {
    require_strict(c)?;
    Ok(ModelIter {
        ctx: Ctx {
            circuit: c,
            consistent: node_consistency(c),
        },
        asg: vec![false; c.num_vars() as usize + 1],
        state: State::Fresh,
        limit,
        produced: 0,
    })
}
