//! Reference implementations for the integration tests. Nothing here calls
//! into the library's reasoning code: models come from plain bitmask
//! enumeration and values from direct summation.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fmreason::cnf::{CnfFormula, Model, Weighting};
use fmreason::fm::{ConstraintKind, FeatureModel, GroupKind, Relation};
use fmreason::Direction;
use proptest::prelude::*;
use rand::Rng;

/// A CNF kept as raw DIMACS integers so the oracle never touches `Lit`.
#[derive(Debug, Clone)]
pub struct RawCnf {
    pub n: u32,
    pub clauses: Vec<Vec<i64>>,
}

impl RawCnf {
    pub fn formula(&self) -> CnfFormula {
        let refs: Vec<&[i64]> = self.clauses.iter().map(Vec::as_slice).collect();
        CnfFormula::from_dimacs_clauses(self.n, &refs).unwrap()
    }

    pub fn dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn from_formula(f: &CnfFormula) -> RawCnf {
        RawCnf {
            n: f.num_vars(),
            clauses: f
                .clauses()
                .iter()
                .map(|c| c.iter().map(|l| l.to_dimacs()).collect())
                .collect(),
        }
    }
}

fn holds(clause: &[i64], mask: u64) -> bool {
    clause.iter().any(|&l| {
        let bit = mask >> (l.unsigned_abs() - 1) & 1 == 1;
        bit == (l > 0)
    })
}

/// Every satisfying assignment as a bitmask (bit `i` is variable `i + 1`),
/// in increasing numeric order.
pub fn oracle_masks(cnf: &RawCnf) -> Vec<u64> {
    assert!(cnf.n <= 24, "oracle is exhaustive");
    (0..1u64 << cnf.n)
        .filter(|&m| cnf.clauses.iter().all(|c| holds(c, m)))
        .collect()
}

pub fn mask_to_bools(n: u32, mask: u64) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

pub fn model_to_mask(m: &Model) -> u64 {
    m.as_bools()
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

pub fn mask_set(models: &[Model]) -> BTreeSet<u64> {
    models.iter().map(model_to_mask).collect()
}

/// Per-variable weights for the selected and deselected polarity.
#[derive(Debug, Clone)]
pub struct RawWeights {
    pub pos: Vec<i64>,
    pub neg: Vec<i64>,
}

impl RawWeights {
    pub fn random<R: Rng>(rng: &mut R, n: u32, l: i64) -> RawWeights {
        RawWeights {
            pos: (0..n).map(|_| rng.gen_range(0..=l)).collect(),
            neg: (0..n).map(|_| rng.gen_range(0..=l)).collect(),
        }
    }

    pub fn weighting(&self) -> Weighting {
        Weighting::from_vectors(self.pos.clone(), self.neg.clone()).unwrap()
    }

    pub fn value(&self, mask: u64) -> i64 {
        (0..self.pos.len())
            .map(|i| if mask >> i & 1 == 1 { self.pos[i] } else { self.neg[i] })
            .sum()
    }

    pub fn file(&self) -> String {
        let mut s = format!("w {} 0 0\n", self.pos.len());
        for (i, (p, n)) in self.pos.iter().zip(&self.neg).enumerate() {
            s.push_str(&format!("{} {p} {n}\n", i + 1));
        }
        s
    }
}

fn order(values: &mut [i64], dir: Direction) {
    values.sort_unstable();
    if dir == Direction::Max {
        values.reverse();
    }
}

pub fn oracle_optimum(masks: &[u64], w: &RawWeights, dir: Direction) -> Option<i64> {
    let values = masks.iter().map(|&m| w.value(m));
    match dir {
        Direction::Min => values.min(),
        Direction::Max => values.max(),
    }
}

/// The `k` best distinct values.
pub fn oracle_topk_values(masks: &[u64], w: &RawWeights, k: usize, dir: Direction) -> Vec<i64> {
    let mut v: Vec<i64> = masks.iter().map(|&m| w.value(m)).collect();
    order(&mut v, dir);
    v.dedup();
    v.truncate(k);
    v
}

/// Values of the `k` best models, with repetition.
pub fn oracle_topk_config_values(masks: &[u64], w: &RawWeights, k: usize, dir: Direction) -> Vec<i64> {
    let mut v: Vec<i64> = masks.iter().map(|&m| w.value(m)).collect();
    order(&mut v, dir);
    v.truncate(k);
    v
}

/// A random CNF with clause widths 1 to 4 and distinct variables per clause.
pub fn random_cnf<R: Rng>(rng: &mut R, max_vars: u32, max_clauses: usize) -> RawCnf {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_clauses);
    random_cnf_sized(rng, n, m)
}

pub fn random_cnf_sized<R: Rng>(rng: &mut R, n: u32, m: usize) -> RawCnf {
    let clauses = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=4.min(n));
            let mut vars: Vec<i64> = Vec::new();
            while vars.len() < width as usize {
                let v = rng.gen_range(1..=i64::from(n));
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            vars.into_iter().map(|v| if rng.gen_bool(0.5) { v } else { -v }).collect()
        })
        .collect();
    RawCnf { n, clauses }
}

pub fn cnf_strategy(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = RawCnf> {
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (1..=i64::from(n), any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        let clause = prop::collection::vec(lit, 1..=4);
        prop::collection::vec(clause, 0..=max_clauses).prop_map(move |clauses| RawCnf { n, clauses })
    })
}

pub fn weights_strategy(n: u32, l: i64) -> impl Strategy<Value = RawWeights> {
    let side = prop::collection::vec(0..=l, n as usize);
    (side.clone(), side).prop_map(|(pos, neg)| RawWeights { pos, neg })
}

/// Whether a feature selection (indexed by feature id) is a valid
/// configuration, read straight off the diagram semantics.
pub fn fm_accepts(fm: &FeatureModel, selected: &[bool]) -> bool {
    for (i, f) in fm.features().iter().enumerate() {
        match f.parent {
            None => {
                if !selected[i] {
                    return false;
                }
            }
            Some(p) => {
                if selected[i] && !selected[p.0] {
                    return false;
                }
                if f.relation == Relation::Mandatory && selected[p.0] && !selected[i] {
                    return false;
                }
            }
        }
    }
    for g in fm.groups() {
        if !selected[g.parent.0] {
            continue;
        }
        let chosen = g.members.iter().filter(|m| selected[m.0]).count();
        let ok = match g.kind {
            GroupKind::Or => chosen >= 1,
            GroupKind::Alternative => chosen == 1,
        };
        if !ok {
            return false;
        }
    }
    fm.constraints().iter().all(|c| match c.kind {
        ConstraintKind::Requires => !selected[c.lhs.0] || selected[c.rhs.0],
        ConstraintKind::Excludes => !(selected[c.lhs.0] && selected[c.rhs.0]),
    })
}

/// Valid configurations as sets of feature names.
pub fn fm_configurations(fm: &FeatureModel) -> BTreeSet<BTreeSet<String>> {
    let n = fm.num_features();
    assert!(n <= 20, "oracle is exhaustive");
    (0..1u64 << n)
        .map(|mask| mask_to_bools(n as u32, mask))
        .filter(|sel| fm_accepts(fm, sel))
        .map(|sel| {
            fm.features()
                .iter()
                .zip(&sel)
                .filter(|(_, &s)| s)
                .map(|(f, _)| f.name.clone())
                .collect()
        })
        .collect()
}

/// Turns variable models into name sets through `names[var - 1]`.
pub fn named(models: impl IntoIterator<Item = u64>, names: &[String]) -> BTreeSet<BTreeSet<String>> {
    models
        .into_iter()
        .map(|mask| {
            names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect()
        })
        .collect()
}

/// Pearson statistic of observed counts against a uniform expectation.
pub fn chi_square(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}
