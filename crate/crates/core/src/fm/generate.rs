use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    ConstraintKind, CrossTreeConstraint, Feature, FeatureId, FeatureModel, Group, GroupKind,
    Relation,
};

/// Shape parameters for [`random_feature_model`].
#[derive(Debug, Clone, Copy)]
pub struct RandomFmParams {
    pub num_features: usize,
    pub num_constraints: usize,
    /// Probability that a new batch of children forms a group.
    pub group_probability: f64,
    /// Probability that a plain child is mandatory.
    pub mandatory_probability: f64,
}

impl RandomFmParams {
    pub fn new(num_features: usize, num_constraints: usize) -> RandomFmParams {
        RandomFmParams {
            num_features,
            num_constraints,
            group_probability: 0.3,
            mandatory_probability: 0.25,
        }
    }
}

/// Generates a random feature model. Features are named `F0`, `F1`, ...
/// with `F0` the root. Constraints never relate a feature to one of its
/// ancestors; the result may still be void (unsatisfiable).
pub fn random_feature_model<R: Rng>(rng: &mut R, params: RandomFmParams) -> FeatureModel {
    let n = params.num_features.max(1);
    let mut features = vec![Feature {
        name: "F0".into(),
        parent: None,
        relation: Relation::Root,
    }];
    let mut groups: Vec<Group> = Vec::new();
    while features.len() < n {
        let parent = FeatureId(rng.gen_range(0..features.len()));
        let remaining = n - features.len();
        if remaining >= 2 && rng.gen_bool(params.group_probability) {
            let size = rng.gen_range(2..=remaining.min(4));
            let kind = if rng.gen_bool(0.5) {
                GroupKind::Or
            } else {
                GroupKind::Alternative
            };
            let mut members = Vec::with_capacity(size);
            for _ in 0..size {
                members.push(FeatureId(features.len()));
                features.push(Feature {
                    name: format!("F{}", features.len()),
                    parent: Some(parent),
                    relation: Relation::GroupMember,
                });
            }
            groups.push(Group {
                parent,
                kind,
                members,
            });
        } else {
            let relation = if rng.gen_bool(params.mandatory_probability) {
                Relation::Mandatory
            } else {
                Relation::Optional
            };
            features.push(Feature {
                name: format!("F{}", features.len()),
                parent: Some(parent),
                relation,
            });
        }
    }

    let is_ancestor = |a: usize, mut b: usize| {
        while let Some(p) = features[b].parent {
            if p.0 == a {
                return true;
            }
            b = p.0;
        }
        false
    };
    let mut constraints = Vec::new();
    let mut candidates: Vec<(usize, usize)> = (1..n)
        .flat_map(|a| (1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && !is_ancestor(a, b) && !is_ancestor(b, a))
        .collect();
    candidates.shuffle(rng);
    for (a, b) in candidates.into_iter().take(params.num_constraints) {
        let kind = if rng.gen_bool(0.5) {
            ConstraintKind::Requires
        } else {
            ConstraintKind::Excludes
        };
        constraints.push(CrossTreeConstraint {
            kind,
            lhs: FeatureId(a),
            rhs: FeatureId(b),
        });
    }
    FeatureModel::new(features, groups, constraints).expect("generator builds valid trees")
}
