//! Top-down compilation of CNF into Decision-DNNF, following the trace of
//! an exhaustive DPLL search with unit propagation, component
//! decomposition and caching of residual formulas.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, Var};
use crate::ddnnf::{CircuitBuilder, DdnnfCircuit, Node, NodeId};
use crate::deadline::{Deadline, Ticker, Timeout};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("circuit exceeded the limit of {0} nodes")]
    NodeLimit(usize),
    #[error(transparent)]
    Timeout(#[from] Timeout),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Most occurrences in the residual clauses, lowest index on ties.
    #[default]
    MostOccurrences,
    /// Occurrences plus a decaying score bumped by conflicts.
    Vsads,
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub heuristic: Heuristic,
    pub cache: bool,
    pub node_limit: Option<usize>,
    pub deadline: Deadline,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            heuristic: Heuristic::default(),
            cache: true,
            node_limit: None,
            deadline: Deadline::none(),
        }
    }
}

pub fn compile(f: &CnfFormula) -> Result<DdnnfCircuit, CompileError> {
    compile_with(f, &CompileOptions::default())
}

pub fn compile_with(f: &CnfFormula, opts: &CompileOptions) -> Result<DdnnfCircuit, CompileError> {
    let n = f.num_vars() as usize;
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
    for (i, c) in f.clauses().iter().enumerate() {
        for l in c {
            occurs[l.code()].push(i);
        }
    }
    let mut c = Compiler {
        clauses: f.clauses(),
        occurs,
        values: vec![None; n + 1],
        trail: Vec::new(),
        builder: CircuitBuilder::new(),
        cache: HashMap::new(),
        activity: vec![0.0; n + 1],
        bump: 1.0,
        opts,
        ticker: Ticker::new(opts.deadline, 64),
    };
    opts.deadline.check()?;
    let root = c.compile_root()?;
    c.builder
        .finish(root, f.num_vars())
        .map_err(|e| unreachable!("compiler produced a malformed circuit: {e}"))
}

struct Compiler<'a> {
    clauses: &'a [Vec<Lit>],
    occurs: Vec<Vec<usize>>,
    values: Vec<Option<bool>>,
    trail: Vec<Lit>,
    builder: CircuitBuilder,
    cache: HashMap<Vec<u32>, NodeId>,
    activity: Vec<f64>,
    bump: f64,
    opts: &'a CompileOptions,
    ticker: Ticker,
}

impl Compiler<'_> {
    fn value(&self, l: Lit) -> Option<bool> {
        self.values[l.var().index() as usize].map(|v| v == l.is_positive())
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var().index() as usize] = Some(l.is_positive());
        self.trail.push(l);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().expect("nonempty trail");
            self.values[l.var().index() as usize] = None;
        }
    }

    /// Propagates from trail position `from`. Returns false on conflict.
    fn propagate(&mut self, from: usize) -> bool {
        let mut head = from;
        while head < self.trail.len() {
            let falsified = !self.trail[head];
            head += 1;
            for k in 0..self.occurs[falsified.code()].len() {
                let ci = self.occurs[falsified.code()][k];
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &l in &self.clauses[ci] {
                    match self.value(l) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open_count += 1;
                            open = Some(l);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match open_count {
                    0 => {
                        self.on_conflict(ci);
                        return false;
                    }
                    1 => self.assign(open.expect("one open literal")),
                    _ => {}
                }
            }
        }
        true
    }

    fn on_conflict(&mut self, clause: usize) {
        if self.opts.heuristic != Heuristic::Vsads {
            return;
        }
        for l in &self.clauses[clause] {
            self.activity[l.var().index() as usize] += self.bump;
        }
        self.bump *= 1.0 / 0.95;
        if self.bump > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
        }
    }

    fn check_limits(&mut self) -> Result<(), CompileError> {
        self.ticker.tick()?;
        if let Some(limit) = self.opts.node_limit {
            if self.builder.len() > limit {
                return Err(CompileError::NodeLimit(limit));
            }
        }
        Ok(())
    }

    fn compile_root(&mut self) -> Result<NodeId, CompileError> {
        if self.clauses.iter().any(|c| c.is_empty()) {
            return Ok(self.builder.false_node());
        }
        for c in self.clauses {
            if c.len() == 1 {
                match self.value(c[0]) {
                    Some(true) => {}
                    Some(false) => return Ok(self.builder.false_node()),
                    None => self.assign(c[0]),
                }
            }
        }
        if !self.propagate(0) {
            return Ok(self.builder.false_node());
        }
        let units = self.implied_tree(0);
        let all: Vec<usize> = (0..self.clauses.len()).collect();
        let rest = self.compile_set(&all)?;
        Ok(self.builder.and(vec![units, rest]))
    }

    /// Binary AND tree over the literals assigned since trail position `from`.
    fn implied_tree(&mut self, from: usize) -> NodeId {
        let mut lits: Vec<Lit> = self.trail[from..].to_vec();
        lits.sort_unstable();
        let leaves: Vec<NodeId> = lits.into_iter().map(|l| self.builder.lit(l)).collect();
        self.builder.and_tree(&leaves)
    }

    /// Residual (unsatisfied) clauses among `candidates`, as clause ids.
    fn residual(&self, candidates: &[usize]) -> Vec<usize> {
        candidates
            .iter()
            .copied()
            .filter(|&ci| !self.clauses[ci].iter().any(|&l| self.value(l) == Some(true)))
            .collect()
    }

    fn cache_key(&self, active: &[usize]) -> Vec<u32> {
        let mut key = Vec::new();
        for &ci in active {
            key.push(ci as u32);
            key.extend(
                self.clauses[ci]
                    .iter()
                    .filter(|&&l| self.value(l).is_none())
                    .map(|l| l.code() as u32 + 1),
            );
            key.push(u32::MAX);
        }
        key
    }

    /// Groups residual clauses that are connected through shared unassigned
    /// variables. Components are ordered by their smallest clause id.
    fn components(&self, active: &[usize]) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..active.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut owner: HashMap<u32, usize> = HashMap::new();
        for (k, &ci) in active.iter().enumerate() {
            for &l in &self.clauses[ci] {
                if self.value(l).is_some() {
                    continue;
                }
                match owner.get(&l.var().index()) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(l.var().index(), k);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
        for (k, &ci) in active.iter().enumerate() {
            let r = find(&mut parent, k);
            let slot = *slot_of_root.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[slot].push(ci);
        }
        groups
    }

    fn pick_var(&self, active: &[usize]) -> Var {
        let mut occ: HashMap<u32, u32> = HashMap::new();
        for &ci in active {
            for &l in &self.clauses[ci] {
                if self.value(l).is_none() {
                    *occ.entry(l.var().index()).or_default() += 1;
                }
            }
        }
        let score = |v: u32, o: u32| match self.opts.heuristic {
            Heuristic::MostOccurrences => o as f64,
            Heuristic::Vsads => o as f64 + self.activity[v as usize],
        };
        let (v, _) = occ
            .into_iter()
            .map(|(v, o)| (v, score(v, o)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("a component has an unassigned variable");
        Var::new(v)
    }

    fn compile_set(&mut self, candidates: &[usize]) -> Result<NodeId, CompileError> {
        self.check_limits()?;
        let active = self.residual(candidates);
        if active.is_empty() {
            return Ok(self.builder.true_node());
        }
        let comps = self.components(&active);
        if comps.len() == 1 {
            return self.compile_component(&active);
        }
        let mut parts = Vec::with_capacity(comps.len());
        for comp in &comps {
            let part = self.compile_component(comp)?;
            if self.builder.node(part) == &Node::False {
                return Ok(part);
            }
            parts.push(part);
        }
        Ok(self.builder.and(parts))
    }

    /// Compiles one connected component by branching on a variable.
    fn compile_component(&mut self, active: &[usize]) -> Result<NodeId, CompileError> {
        let key = self.opts.cache.then(|| self.cache_key(active));
        if let Some(&hit) = key.as_ref().and_then(|k| self.cache.get(k)) {
            return Ok(hit);
        }
        let x = self.pick_var(active);
        let mut branches = [0; 2];
        for (slot, positive) in [(0, true), (1, false)] {
            let mark = self.trail.len();
            self.assign(Lit::new(x, positive));
            branches[slot] = if self.propagate(mark) {
                let units = self.implied_tree(mark + 1);
                let rest = self.compile_set(active)?;
                self.builder.and(vec![units, rest])
            } else {
                self.builder.false_node()
            };
            self.undo_to(mark);
        }
        let node = self.builder.decision(x, branches[0], branches[1]);
        if let Some(k) = key {
            self.cache.insert(k, node);
        }
        Ok(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{brute_force_models, Model};
    use crate::ddnnf::write_canonical;
    use crate::fixtures::mobile_formula;

    fn models_of(c: &DdnnfCircuit) -> usize {
        let n = c.num_vars();
        (0..1u32 << n)
            .filter(|bits| c.evaluate(&Model::from_bools((0..n).map(|i| bits >> i & 1 == 1).collect())))
            .count()
    }

    #[test]
    fn unit_clause() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let c = compile(&f).unwrap();
        assert_eq!(c.node(c.root()), &Node::Lit(Lit::from_dimacs(1).unwrap()));
        assert_eq!(models_of(&c), 1);
    }

    #[test]
    fn mobile_compiles_to_fourteen_models() {
        let f = mobile_formula();
        let c = compile(&f).unwrap();
        assert!(c.validate().is_valid());
        assert_eq!(models_of(&c), 14);
        let oracle = brute_force_models(&f).unwrap();
        for m in &oracle {
            assert!(c.evaluate(m));
        }
    }

    #[test]
    fn exclusive_or_has_two_models() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[-1, -2]]).unwrap();
        let c = compile(&f).unwrap();
        assert!(c.validate().is_valid());
        assert_eq!(models_of(&c), 2);
    }

    #[test]
    fn contradictions_compile_to_false() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let c = compile(&f).unwrap();
        assert_eq!(c.node(c.root()), &Node::False);
        let g = CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]).unwrap();
        assert_eq!(models_of(&compile(&g).unwrap()), 0);
    }

    #[test]
    fn empty_formula_is_true() {
        let c = compile(&CnfFormula::new(3)).unwrap();
        assert_eq!(c.node(c.root()), &Node::True);
        assert_eq!(c.num_vars(), 3);
    }

    #[test]
    fn cache_and_heuristic_variants_agree() {
        let f = mobile_formula();
        for heuristic in [Heuristic::MostOccurrences, Heuristic::Vsads] {
            for cache in [true, false] {
                let opts = CompileOptions {
                    heuristic,
                    cache,
                    ..CompileOptions::default()
                };
                let c = compile_with(&f, &opts).unwrap();
                assert!(c.validate().is_valid());
                assert_eq!(models_of(&c), 14);
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let f = mobile_formula();
        let a = write_canonical(&compile(&f).unwrap()).unwrap();
        let b = write_canonical(&compile(&f).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn node_limit_and_deadline() {
        let f = mobile_formula();
        let opts = CompileOptions {
            node_limit: Some(2),
            ..CompileOptions::default()
        };
        assert_eq!(compile_with(&f, &opts), Err(CompileError::NodeLimit(2)));
        let opts = CompileOptions {
            deadline: Deadline::after(std::time::Duration::ZERO),
            ..CompileOptions::default()
        };
        assert!(matches!(compile_with(&f, &opts), Err(CompileError::Timeout(_))));
    }
}
