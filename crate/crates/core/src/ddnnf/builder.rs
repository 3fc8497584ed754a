use std::collections::HashMap;

use super::{DdnnfCircuit, DdnnfError, Node, NodeId};
use crate::cnf::{Lit, Var};

/// Appends nodes in topological order with hash-consing, so structurally
/// equal nodes (in particular the constants) are shared.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl CircuitBuilder {
    pub fn new() -> CircuitBuilder {
        CircuitBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    fn push(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn true_node(&mut self) -> NodeId {
        self.push(Node::True)
    }

    pub fn false_node(&mut self) -> NodeId {
        self.push(Node::False)
    }

    pub fn lit(&mut self, l: Lit) -> NodeId {
        self.push(Node::Lit(l))
    }

    /// Conjunction with constant folding: `True` children vanish, a `False`
    /// child absorbs, and singletons collapse to their child.
    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match self.nodes[c] {
                Node::True => {}
                Node::False => return self.false_node(),
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.true_node(),
            1 => kept[0],
            _ => self.push(Node::And(kept)),
        }
    }

    /// Balanced binary tree of ANDs over `children`, bounding fan-in to two.
    pub fn and_tree(&mut self, children: &[NodeId]) -> NodeId {
        match children.len() {
            0 => self.true_node(),
            1 => children[0],
            _ => {
                let (l, r) = children.split_at(children.len() / 2);
                let l = self.and_tree(l);
                let r = self.and_tree(r);
                self.and(vec![l, r])
            }
        }
    }

    pub fn decision(&mut self, var: Var, hi: NodeId, lo: NodeId) -> NodeId {
        let false_id = self.index.get(&Node::False).copied();
        if Some(hi) == false_id && Some(lo) == false_id {
            return hi;
        }
        self.push(Node::Decision { var, hi, lo })
    }

    pub fn or(&mut self, children: Vec<NodeId>) -> NodeId {
        let kept: Vec<NodeId> = children
            .into_iter()
            .filter(|&c| self.nodes[c] != Node::False)
            .collect();
        match kept.len() {
            0 => self.false_node(),
            1 => kept[0],
            _ => self.push(Node::Or(kept)),
        }
    }

    /// Freezes the arena into a circuit, dropping nodes unreachable from `root`.
    pub fn finish(self, root: NodeId, num_vars: u32) -> Result<DdnnfCircuit, DdnnfError> {
        Ok(DdnnfCircuit::new(self.nodes, root, num_vars)?.compact())
    }
}
