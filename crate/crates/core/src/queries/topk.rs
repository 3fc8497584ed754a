//! Top-k transformation: every node keeps its k best objective values (or
//! k best value/assignment pairs), combined bottom-up.
//!
//! AND nodes take truncated sumsets of their children's lists; disjunctive
//! nodes merge the lists of their branches, each shifted by the branch
//! literal and extended by the branch's free variables. Truncating to k at
//! every node is exact because all combinations are monotone.
//!
//! Configurations are ordered by value, then by assignment read as a bit
//! string in variable order with `false < true`. The tie order is
//! compatible with the combinations above, so truncation stays exact.

use std::cmp::Ordering;
use std::fmt;

use super::{branches, check_weighting, require_strict, root_branch, Branch, QueryError};
use crate::cnf::{Lit, Model, Var, Weighting};
use crate::ddnnf::{DdnnfCircuit, Node};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopKMode {
    Values,
    Configurations,
}

impl TopKMode {
    pub fn parse(s: &str) -> Option<TopKMode> {
        match s {
            "values" => Some(TopKMode::Values),
            "configurations" | "configs" => Some(TopKMode::Configurations),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopKEntries {
    /// Distinct values, strictly monotone in the optimization direction.
    Values(Vec<i64>),
    /// Value and model pairs, weakly monotone by value.
    Configurations(Vec<(i64, Model)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKList {
    pub dir: Direction,
    pub k: usize,
    pub entries: TopKEntries,
}

impl TopKList {
    pub fn mode(&self) -> TopKMode {
        match self.entries {
            TopKEntries::Values(_) => TopKMode::Values,
            TopKEntries::Configurations(_) => TopKMode::Configurations,
        }
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            TopKEntries::Values(v) => v.len(),
            TopKEntries::Configurations(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<i64> {
        match &self.entries {
            TopKEntries::Values(v) => v.clone(),
            TopKEntries::Configurations(c) => c.iter().map(|e| e.0).collect(),
        }
    }
}

/// One line per entry: the value, then a tab and the model for
/// configurations.
impl fmt::Display for TopKList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.entries {
            TopKEntries::Values(vs) => {
                for v in vs {
                    writeln!(f, "{v}")?;
                }
            }
            TopKEntries::Configurations(cs) => {
                for (v, m) in cs {
                    writeln!(f, "{v}\t{m}")?;
                }
            }
        }
        Ok(())
    }
}

fn order(dir: Direction, a: i64, b: i64) -> Ordering {
    match dir {
        Direction::Min => a.cmp(&b),
        Direction::Max => b.cmp(&a),
    }
}

/// `k` best distinct values of `{x + y}`.
fn sumset(a: &[i64], b: &[i64], k: usize, dir: Direction) -> Vec<i64> {
    let mut out: Vec<i64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    normalize_values(&mut out, k, dir);
    out
}

fn normalize_values(v: &mut Vec<i64>, k: usize, dir: Direction) {
    v.sort_by(|&x, &y| order(dir, x, y));
    v.dedup();
    v.truncate(k);
}

fn free_values(w: &Weighting, v: u32) -> Vec<i64> {
    let var = Var::new(v);
    let mut out = vec![w.neg(var), w.pos(var)];
    out.dedup();
    out
}

fn values_pass(c: &DdnnfCircuit, w: &Weighting, k: usize, dir: Direction) -> Vec<i64> {
    let extend = |lists: &[Vec<i64>], b: &Branch| -> Vec<i64> {
        let shift = b.lit.map_or(0, |l| w.lit_weight(l));
        let mut acc: Vec<i64> = lists[b.child].iter().map(|x| x + shift).collect();
        for &v in &b.free {
            if acc.is_empty() {
                break;
            }
            acc = sumset(&acc, &free_values(w, v), k, dir);
        }
        acc
    };
    let mut lists: Vec<Vec<i64>> = Vec::with_capacity(c.num_nodes());
    for (id, node) in c.nodes().iter().enumerate() {
        let list = match node {
            Node::True => vec![0],
            Node::False => vec![],
            Node::Lit(l) => vec![w.lit_weight(*l)],
            Node::And(ch) => ch
                .iter()
                .fold(vec![0], |acc, &i| sumset(&acc, &lists[i], k, dir)),
            Node::Decision { .. } | Node::Or(_) => {
                let mut all: Vec<i64> = branches(c, id)
                    .expect("disjunctive node")
                    .iter()
                    .flat_map(|b| extend(&lists, b))
                    .collect();
                normalize_values(&mut all, k, dir);
                all
            }
        };
        lists.push(list);
    }
    extend(&lists, &root_branch(c))
}

/// A partial assignment sorted by variable.
type Partial = Vec<Lit>;

/// Bit-string order over assignments to the same variables.
fn cmp_partial(a: &Partial, b: &Partial) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        debug_assert_eq!(x.var(), y.var());
        match x.is_positive().cmp(&y.is_positive()) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

fn merge(a: &Partial, b: &Partial) -> Partial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].var() < b[j].var() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

type Config = (i64, Partial);

fn normalize_configs(v: &mut Vec<Config>, k: usize, dir: Direction) {
    v.sort_by(|a, b| order(dir, a.0, b.0).then_with(|| cmp_partial(&a.1, &b.1)));
    v.truncate(k);
}

fn product(a: &[Config], b: &[Config], k: usize, dir: Direction) -> Vec<Config> {
    let mut out: Vec<Config> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x.0 + y.0, merge(&x.1, &y.1))))
        .collect();
    normalize_configs(&mut out, k, dir);
    out
}

fn configs_pass(c: &DdnnfCircuit, w: &Weighting, k: usize, dir: Direction) -> Vec<Config> {
    let unit = |l: Lit| -> Vec<Config> { vec![(w.lit_weight(l), vec![l])] };
    let extend = |lists: &[Vec<Config>], b: &Branch| -> Vec<Config> {
        let mut acc = lists[b.child].clone();
        if let Some(l) = b.lit {
            acc = product(&acc, &unit(l), k, dir);
        }
        for &v in &b.free {
            if acc.is_empty() {
                break;
            }
            let var = Var::new(v);
            let both = [unit(var.negative()), unit(var.positive())].concat();
            acc = product(&acc, &both, k, dir);
        }
        acc
    };
    let mut lists: Vec<Vec<Config>> = Vec::with_capacity(c.num_nodes());
    for (id, node) in c.nodes().iter().enumerate() {
        let list = match node {
            Node::True => vec![(0, vec![])],
            Node::False => vec![],
            Node::Lit(l) => unit(*l),
            Node::And(ch) => ch
                .iter()
                .fold(vec![(0, vec![])], |acc, &i| product(&acc, &lists[i], k, dir)),
            Node::Decision { .. } | Node::Or(_) => {
                let mut all: Vec<Config> = branches(c, id)
                    .expect("disjunctive node")
                    .iter()
                    .flat_map(|b| extend(&lists, b))
                    .collect();
                normalize_configs(&mut all, k, dir);
                all
            }
        };
        lists.push(list);
    }
    extend(&lists, &root_branch(c))
}

/// The k best distinct values, or the k best (value, model) pairs, of the
/// circuit's models under `w`.
pub fn topk_transform(
    c: &DdnnfCircuit,
    w: &Weighting,
    k: usize,
    dir: Direction,
    mode: TopKMode,
) -> Result<TopKList, QueryError> {
    require_strict(c)?;
    check_weighting(c, w)?;
    if k == 0 {
        return Err(QueryError::ZeroK);
    }
    let entries = match mode {
        TopKMode::Values => TopKEntries::Values(values_pass(c, w, k, dir)),
        TopKMode::Configurations => TopKEntries::Configurations(
            configs_pass(c, w, k, dir)
                .into_iter()
                .map(|(v, lits)| {
                    debug_assert_eq!(lits.len(), c.num_vars() as usize);
                    (v, Model::from_bools(lits.iter().map(|l| l.is_positive()).collect()))
                })
                .collect(),
        ),
    };
    Ok(TopKList { dir, k, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{brute_force_models, is_model};
    use crate::compiler::compile;
    use crate::fixtures::mobile_formula;
    use crate::queries::optimize;

    fn mobile() -> (DdnnfCircuit, Weighting) {
        (compile(&mobile_formula()).unwrap(), Weighting::unit_positive(10).unwrap())
    }

    #[test]
    fn mobile_top3_values() {
        let (c, w) = mobile();
        let t = topk_transform(&c, &w, 3, Direction::Min, TopKMode::Values).unwrap();
        assert_eq!(t.entries, TopKEntries::Values(vec![4, 5, 6]));
        assert_eq!(t.to_string(), "4\n5\n6\n");
        let all = topk_transform(&c, &w, 100, Direction::Max, TopKMode::Values).unwrap();
        assert_eq!(all.values(), vec![8, 7, 6, 5, 4]);
    }

    #[test]
    fn k1_matches_optimize() {
        let (c, w) = mobile();
        for dir in [Direction::Min, Direction::Max] {
            let t = topk_transform(&c, &w, 1, dir, TopKMode::Values).unwrap();
            assert_eq!(t.values(), vec![optimize(&c, &w, dir).unwrap().unwrap().value]);
        }
    }

    #[test]
    fn all_configurations_sorted_by_value() {
        let (c, w) = mobile();
        let f = mobile_formula();
        let t = topk_transform(&c, &w, 20, Direction::Min, TopKMode::Configurations).unwrap();
        let TopKEntries::Configurations(entries) = &t.entries else {
            panic!("wrong mode");
        };
        assert_eq!(entries.len(), 14);
        for (v, m) in entries {
            assert!(is_model(&f, m));
            assert_eq!(w.value(m), *v);
        }
        let mut oracle: Vec<i64> = brute_force_models(&f).unwrap().iter().map(|m| w.value(m)).collect();
        oracle.sort();
        assert_eq!(t.values(), oracle);
        assert!(t.to_string().starts_with("4\t"));
    }

    #[test]
    fn configuration_ties_break_lexicographically() {
        let (c, w) = mobile();
        let f = mobile_formula();
        let t = topk_transform(&c, &w, 14, Direction::Min, TopKMode::Configurations).unwrap();
        let TopKEntries::Configurations(entries) = t.entries else {
            panic!("wrong mode");
        };
        let mut oracle: Vec<(i64, Vec<bool>)> = brute_force_models(&f)
            .unwrap()
            .iter()
            .map(|m| (w.value(m), m.as_bools().to_vec()))
            .collect();
        oracle.sort();
        let got: Vec<(i64, Vec<bool>)> = entries.iter().map(|(v, m)| (*v, m.as_bools().to_vec())).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn inconsistent_gives_empty_list() {
        let f = crate::cnf::CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let c = compile(&f).unwrap();
        let w = Weighting::unit_positive(1).unwrap();
        assert!(topk_transform(&c, &w, 3, Direction::Min, TopKMode::Values).unwrap().is_empty());
        assert!(topk_transform(&c, &w, 3, Direction::Min, TopKMode::Configurations)
            .unwrap()
            .is_empty());
        assert_eq!(
            topk_transform(&c, &w, 0, Direction::Min, TopKMode::Values),
            Err(QueryError::ZeroK)
        );
    }
}
