use std::collections::{HashMap, VecDeque};

use super::{ConstraintKind, FeatureId, FeatureModel, GroupKind, Relation};
use crate::cnf::{CnfFormula, Lit, Var};

/// Bijection between feature names and variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameMap {
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl NameMap {
    pub fn from_names(names: Vec<String>) -> NameMap {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Var::new(i as u32 + 1)))
            .collect();
        NameMap { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn name(&self, var: Var) -> &str {
        &self.names[var.slot()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Encodes a feature model as CNF.
///
/// Variables are numbered breadth-first over the tree, root first. Clause
/// order: root unit, per-child parent implications (plus the converse for
/// mandatory children), group clauses in declaration order, then cross-tree
/// constraints.
pub fn encode_fm(fm: &FeatureModel) -> (CnfFormula, NameMap) {
    let mut order: Vec<FeatureId> = Vec::with_capacity(fm.num_features());
    let mut queue = VecDeque::from([fm.root()]);
    while let Some(id) = queue.pop_front() {
        order.push(id);
        queue.extend(fm.children(id));
    }
    let mut var_of = vec![Var::new(1); fm.num_features()];
    for (i, id) in order.iter().enumerate() {
        var_of[id.0] = Var::new(i as u32 + 1);
    }
    let names = NameMap::from_names(order.iter().map(|&id| fm.feature(id).name.clone()).collect());
    let pos = |id: FeatureId| var_of[id.0].positive();
    let neg = |id: FeatureId| var_of[id.0].negative();

    let mut f = CnfFormula::new(fm.num_features() as u32);
    let mut push = |clause: Vec<Lit>| {
        f.add_clause(clause).expect("encoder literals are in range");
    };
    push(vec![pos(fm.root())]);
    for &id in &order {
        let feature = fm.feature(id);
        let Some(parent) = feature.parent else { continue };
        push(vec![pos(parent), neg(id)]);
        if feature.relation == Relation::Mandatory {
            push(vec![pos(id), neg(parent)]);
        }
    }
    for g in fm.groups() {
        let mut at_least_one: Vec<Lit> = g.members.iter().map(|&m| pos(m)).collect();
        at_least_one.push(neg(g.parent));
        push(at_least_one);
        if g.kind == GroupKind::Alternative {
            for (i, &a) in g.members.iter().enumerate() {
                for &b in &g.members[i + 1..] {
                    push(vec![neg(a), neg(b)]);
                }
            }
        }
    }
    for c in fm.constraints() {
        match c.kind {
            ConstraintKind::Requires => push(vec![neg(c.lhs), pos(c.rhs)]),
            ConstraintKind::Excludes => push(vec![neg(c.lhs), neg(c.rhs)]),
        }
    }
    (f, names)
}
