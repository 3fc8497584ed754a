//! Decision-DNNF circuits.
//!
//! A circuit is an arena of nodes in topological order: every child id is
//! smaller than its parent's. Each node caches the sorted set of variables
//! occurring below it. A decision node `D(x, hi, lo)` stands for
//! `(x and hi) or (not x and lo)`; `x` itself must not occur in either branch.
//!
//! General deterministic OR nodes are representable only so that c2d output
//! which is not in decision form can still be counted; see [`Node::Or`].

mod builder;
mod format;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::cnf::{Lit, Model, Var};

pub use builder::CircuitBuilder;
pub use format::{parse_c2d_nnf, parse_canonical, write_canonical, C2dMode};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    Lit(Lit),
    And(Vec<NodeId>),
    Decision { var: Var, hi: NodeId, lo: NodeId },
    /// Deterministic disjunction that is not a binary decision. Only produced
    /// by the permissive c2d reader.
    Or(Vec<NodeId>),
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::And(c) | Node::Or(c) => c,
            _ => &[],
        }
    }

    /// Child ids in order, including decision branches (hi first).
    pub fn successors(&self) -> Vec<NodeId> {
        match self {
            Node::Decision { hi, lo, .. } => vec![*hi, *lo],
            other => other.children().to_vec(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DdnnfError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header mismatch: {0}")]
    Header(String),
    #[error("node {node} refers to child {child}, which does not precede it")]
    DanglingChild { node: NodeId, child: NodeId },
    #[error("root {root} out of range for {num_nodes} nodes")]
    BadRoot { root: NodeId, num_nodes: usize },
    #[error("node {node} mentions variable {var} outside 1..={num_vars}")]
    VarOutOfRange { node: NodeId, var: u32, num_vars: u32 },
    #[error("node {node}: OR node is not a binary decision")]
    NotDecision { node: NodeId },
    #[error("circuit is not a valid Decision-DNNF: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DdnnfCircuit {
    nodes: Vec<Node>,
    root: NodeId,
    num_vars: u32,
    vars: Vec<Vec<u32>>,
}

impl DdnnfCircuit {
    /// Checks ids and variable ranges and computes the per-node variable
    /// sets. Decomposability and decision form are checked by
    /// [`validate`](DdnnfCircuit::validate).
    pub fn new(nodes: Vec<Node>, root: NodeId, num_vars: u32) -> Result<DdnnfCircuit, DdnnfError> {
        if root >= nodes.len() {
            return Err(DdnnfError::BadRoot {
                root,
                num_nodes: nodes.len(),
            });
        }
        let mut vars: Vec<Vec<u32>> = Vec::with_capacity(nodes.len());
        for (id, node) in nodes.iter().enumerate() {
            let check_var = |v: Var| {
                if v.index() == 0 || v.index() > num_vars {
                    Err(DdnnfError::VarOutOfRange {
                        node: id,
                        var: v.index(),
                        num_vars,
                    })
                } else {
                    Ok(())
                }
            };
            for child in node.successors() {
                if child >= id {
                    return Err(DdnnfError::DanglingChild { node: id, child });
                }
            }
            let set = match node {
                Node::True | Node::False => Vec::new(),
                Node::Lit(l) => {
                    check_var(l.var())?;
                    vec![l.var().index()]
                }
                Node::And(c) | Node::Or(c) => union(c.iter().map(|&i| vars[i].as_slice())),
                Node::Decision { var, hi, lo } => {
                    check_var(*var)?;
                    let own = [var.index()];
                    union([own.as_slice(), &vars[*hi], &vars[*lo]].into_iter())
                }
            };
            vars.push(set);
        }
        Ok(DdnnfCircuit {
            nodes,
            root,
            num_vars,
            vars,
        })
    }

    /// Like [`new`](DdnnfCircuit::new), then rejects circuits with any
    /// validation violation.
    pub fn new_validated(nodes: Vec<Node>, root: NodeId, num_vars: u32) -> Result<DdnnfCircuit, DdnnfError> {
        let c = DdnnfCircuit::new(nodes, root, num_vars)?;
        let report = c.validate();
        if report.is_valid() {
            Ok(c)
        } else {
            Err(DdnnfError::Invalid(report))
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.successors().len()).sum()
    }

    /// Sorted variable indices occurring in the subcircuit rooted at `id`.
    pub fn vars(&self, id: NodeId) -> &[u32] {
        &self.vars[id]
    }

    /// True when every disjunction is a decision node.
    pub fn is_strict(&self) -> bool {
        !self.nodes.iter().any(|n| matches!(n, Node::Or(_)))
    }

    /// Ids of nodes reachable from the root, ascending.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        seen[self.root] = true;
        for id in (0..self.nodes.len()).rev() {
            if seen[id] {
                for c in self.nodes[id].successors() {
                    seen[c] = true;
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    /// Drops unreachable nodes, keeping the relative order of the rest.
    pub fn compact(&self) -> DdnnfCircuit {
        let keep = self.reachable();
        if keep.len() == self.nodes.len() {
            return self.clone();
        }
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        for (i, &old) in keep.iter().enumerate() {
            new_id[old] = i;
        }
        let nodes: Vec<Node> = keep
            .iter()
            .map(|&old| match &self.nodes[old] {
                Node::And(c) => Node::And(c.iter().map(|&x| new_id[x]).collect()),
                Node::Or(c) => Node::Or(c.iter().map(|&x| new_id[x]).collect()),
                Node::Decision { var, hi, lo } => Node::Decision {
                    var: *var,
                    hi: new_id[*hi],
                    lo: new_id[*lo],
                },
                other => other.clone(),
            })
            .collect();
        let vars = keep.iter().map(|&old| self.vars[old].clone()).collect();
        DdnnfCircuit {
            nodes,
            root: new_id[self.root],
            num_vars: self.num_vars,
            vars,
        }
    }

    /// Checks decomposability of AND nodes and the decision form of
    /// disjunctions, for nodes reachable from the root.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for id in self.reachable() {
            match &self.nodes[id] {
                Node::And(children) => {
                    let mut seen: HashSet<u32> = HashSet::new();
                    let mut shared = None;
                    for &c in children {
                        for &v in &self.vars[c] {
                            if !seen.insert(v) && shared.is_none() {
                                shared = Some(v);
                            }
                        }
                    }
                    if let Some(v) = shared {
                        violations.push(Violation {
                            node: id,
                            kind: ViolationKind::Decomposability { var: Var::new(v) },
                        });
                    }
                }
                Node::Decision { var, hi, lo } => {
                    let x = var.index();
                    if self.vars[*hi].binary_search(&x).is_ok() || self.vars[*lo].binary_search(&x).is_ok() {
                        violations.push(Violation {
                            node: id,
                            kind: ViolationKind::DecisionForm { var: *var },
                        });
                    }
                }
                Node::Or(_) => violations.push(Violation {
                    node: id,
                    kind: ViolationKind::NonDecisionOr,
                }),
                _ => {}
            }
        }
        ValidationReport { violations }
    }

    /// Evaluates the circuit on a total assignment over `1..=num_vars`.
    pub fn evaluate(&self, m: &Model) -> bool {
        assert_eq!(m.num_vars(), self.num_vars, "model size differs from circuit universe");
        let mut val = vec![false; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            val[id] = match node {
                Node::True => true,
                Node::False => false,
                Node::Lit(l) => m.satisfies(*l),
                Node::And(c) => c.iter().all(|&i| val[i]),
                Node::Or(c) => c.iter().any(|&i| val[i]),
                Node::Decision { var, hi, lo } => {
                    if m.value(*var) {
                        val[*hi]
                    } else {
                        val[*lo]
                    }
                }
            };
        }
        val[self.root]
    }
}

fn union<'a>(sets: impl Iterator<Item = &'a [u32]>) -> Vec<u32> {
    let mut out: Vec<u32> = sets.flatten().copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Two children of an AND node share `var`.
    Decomposability { var: Var },
    /// The decision variable occurs inside one of the branches.
    DecisionForm { var: Var },
    /// A disjunction that is not a binary decision.
    NonDecisionOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Decomposability { var } => {
                write!(f, "node {}: AND children share variable {var}", self.node)
            }
            ViolationKind::DecisionForm { var } => {
                write!(f, "node {}: decision variable {var} occurs in a branch", self.node)
            }
            ViolationKind::NonDecisionOr => write!(f, "node {}: OR node is not a decision", self.node),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
