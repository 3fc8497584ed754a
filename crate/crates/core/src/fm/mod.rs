//! Feature models: feature trees with mandatory/optional children, or- and
//! alternative-groups, and requires/excludes cross-tree constraints.

mod encode;
mod generate;
mod parse;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use encode::{encode_fm, NameMap};
pub use generate::{random_feature_model, RandomFmParams};
pub use parse::{parse_fm, write_fm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FmError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("unknown feature `{0}` in constraint")]
    UnknownFeature(String),
    #[error("feature tree contains a cycle through `{0}`")]
    Cycle(String),
    #[error("feature model must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("group under `{0}` has no members")]
    EmptyGroup(String),
    #[error("invalid feature model: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Root,
    Mandatory,
    Optional,
    GroupMember,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub parent: Option<FeatureId>,
    pub relation: Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Or,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub parent: FeatureId,
    pub kind: GroupKind,
    pub members: Vec<FeatureId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Requires,
    Excludes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossTreeConstraint {
    pub kind: ConstraintKind,
    pub lhs: FeatureId,
    pub rhs: FeatureId,
}

/// A validated feature model. Construct with [`FeatureModel::new`] or [`parse_fm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    features: Vec<Feature>,
    groups: Vec<Group>,
    constraints: Vec<CrossTreeConstraint>,
    root: FeatureId,
}

impl FeatureModel {
    /// Validates the tree and group structure. Features are listed in
    /// declaration order; that order fixes child order in the tree.
    pub fn new(
        features: Vec<Feature>,
        groups: Vec<Group>,
        constraints: Vec<CrossTreeConstraint>,
    ) -> Result<FeatureModel, FmError> {
        let n = features.len();
        let mut names: HashMap<&str, usize> = HashMap::new();
        for f in &features {
            if f.name.is_empty() || f.name.chars().any(char::is_whitespace) {
                return Err(FmError::Invalid(format!("bad feature name `{}`", f.name)));
            }
            if names.insert(&f.name, 0).is_some() {
                return Err(FmError::DuplicateFeature(f.name.clone()));
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| features[i].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(FmError::RootCount(roots.len()));
        }
        let root = roots[0];
        for (i, f) in features.iter().enumerate() {
            if let Some(p) = f.parent {
                if p.0 >= n {
                    return Err(FmError::Invalid(format!("`{}` has a dangling parent", f.name)));
                }
                if f.relation == Relation::Root {
                    return Err(FmError::Invalid(format!("`{}` is tagged root but has a parent", f.name)));
                }
            } else if f.relation != Relation::Root {
                return Err(FmError::Invalid(format!("root `{}` must have the root relation", f.name)));
            }
            // Walk to the root; more than n steps means a cycle.
            let mut cur = i;
            let mut steps = 0;
            while let Some(p) = features[cur].parent {
                cur = p.0;
                steps += 1;
                if steps > n {
                    return Err(FmError::Cycle(f.name.clone()));
                }
            }
        }
        let mut membership = vec![0usize; n];
        for g in &groups {
            if g.parent.0 >= n {
                return Err(FmError::Invalid("group with dangling parent".into()));
            }
            if g.members.is_empty() {
                return Err(FmError::EmptyGroup(features[g.parent.0].name.clone()));
            }
            for m in &g.members {
                if m.0 >= n || features[m.0].parent != Some(g.parent) {
                    return Err(FmError::Invalid(format!(
                        "group member is not a child of `{}`",
                        features[g.parent.0].name
                    )));
                }
                membership[m.0] += 1;
            }
        }
        for (i, f) in features.iter().enumerate() {
            let is_member = f.relation == Relation::GroupMember;
            if is_member && membership[i] != 1 || !is_member && membership[i] != 0 {
                return Err(FmError::Invalid(format!(
                    "`{}` must belong to exactly one group iff it is a group member",
                    f.name
                )));
            }
        }
        for c in &constraints {
            if c.lhs.0 >= n || c.rhs.0 >= n {
                return Err(FmError::Invalid("constraint refers to a missing feature".into()));
            }
            if c.lhs == c.rhs {
                return Err(FmError::Invalid(format!(
                    "constraint relates `{}` to itself",
                    features[c.lhs.0].name
                )));
            }
        }
        Ok(FeatureModel {
            features,
            groups,
            constraints,
            root: FeatureId(root),
        })
    }

    pub fn root(&self) -> FeatureId {
        self.root
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id.0]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn constraints(&self) -> &[CrossTreeConstraint] {
        &self.constraints
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn find(&self, name: &str) -> Option<FeatureId> {
        self.features.iter().position(|f| f.name == name).map(FeatureId)
    }

    /// Children of `id` in declaration order.
    pub fn children(&self, id: FeatureId) -> impl Iterator<Item = FeatureId> + '_ {
        self.features
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.parent == Some(id))
            .map(|(i, _)| FeatureId(i))
    }

    /// The group `id` belongs to, if it is a group member.
    pub fn group_of(&self, id: FeatureId) -> Option<&Group> {
        self.groups.iter().find(|g| g.members.contains(&id))
    }

    /// Groups owned by `id`.
    pub fn groups_of(&self, id: FeatureId) -> impl Iterator<Item = &Group> + '_ {
        self.groups.iter().filter(move |g| g.parent == id)
    }
}

impl fmt::Display for FeatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_fm(self))
    }
}
