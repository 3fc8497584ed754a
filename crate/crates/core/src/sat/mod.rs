//! Incremental SAT engine.
//!
//! Conflict-driven clause learning with two watched literals, first-UIP
//! learning, phase saving, activity-based branching and Luby restarts.
//! Pseudo-Boolean constraints `sum c_i * l_i >= k` are handled natively by a
//! slack-counter propagator. A plain DPLL backend is kept for differential
//! testing.

mod dpll;
mod heap;

use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, Model, Var};
use crate::deadline::{Deadline, Ticker, Timeout};
use heap::VarHeap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("pseudo-Boolean constraint must have positive coefficients over distinct variables")]
    MalformedPb,
    #[error(transparent)]
    Timeout(#[from] Timeout),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SolveResult::Sat(m) => Some(m),
            SolveResult::Unsat => None,
        }
    }

    pub fn into_model(self) -> Option<Model> {
        match self {
            SolveResult::Sat(m) => Some(m),
            SolveResult::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Unknown,
    Sat,
    Unsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Cdcl,
    /// Chronological backtracking with clause unit propagation only;
    /// pseudo-Boolean constraints are checked on total assignments.
    Dpll,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Cap on retained learned clauses; `None` keeps all of them.
    pub max_learnts: Option<usize>,
    /// Conflicts per Luby unit between restarts.
    pub restart_unit: u64,
    pub var_decay: f64,
    pub deadline: Deadline,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Cdcl,
            max_learnts: None,
            restart_unit: 100,
            var_decay: 0.95,
            deadline: Deadline::none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Decision,
    Clause(u32),
    Pb(u32),
}

#[derive(Debug, Clone, Copy)]
enum Conflict {
    Clause(u32),
    Pb(u32),
}

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

#[derive(Debug, Clone)]
struct PbConstraint {
    // sorted by decreasing coefficient
    terms: Vec<(i64, Lit)>,
    // sum of coefficients of non-false terms minus bound
    slack: i64,
}

pub struct Solver {
    config: SolverConfig,
    num_vars: u32,
    status: Status,

    // Irredundant database kept verbatim for the DPLL backend and model checks.
    db_clauses: Vec<Vec<Lit>>,
    db_pbs: Vec<(Vec<(i64, Lit)>, i64)>,
    original_clause_count: usize,

    clauses: Vec<Clause>,
    num_learnts: usize,
    watches: Vec<Vec<Watch>>,
    pbs: Vec<PbConstraint>,
    pb_occurrences: Vec<Vec<(u32, i64)>>,

    values: Vec<Value>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,

    conflicts: u64,
    decisions: u64,
    propagations: u64,
}

impl Solver {
    pub fn new(f: &CnfFormula) -> Solver {
        Solver::with_config(f, SolverConfig::default())
    }

    pub fn with_config(f: &CnfFormula, config: SolverConfig) -> Solver {
        let n = f.num_vars();
        let slots = n as usize + 1;
        let mut s = Solver {
            config,
            num_vars: n,
            status: Status::Unknown,
            db_clauses: Vec::new(),
            db_pbs: Vec::new(),
            original_clause_count: f.num_clauses(),
            clauses: Vec::new(),
            num_learnts: 0,
            watches: vec![Vec::new(); 2 * slots],
            pbs: Vec::new(),
            pb_occurrences: vec![Vec::new(); 2 * slots],
            values: vec![Value::Undef; slots],
            levels: vec![0; slots],
            reasons: vec![Reason::Decision; slots],
            trail_pos: vec![0; slots],
            trail: Vec::with_capacity(slots),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; slots],
            var_inc: 1.0,
            heap: VarHeap::new(n),
            phase: vec![false; slots],
            seen: vec![false; slots],
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        };
        for v in 1..=n {
            s.heap.insert(v, &s.activity);
        }
        for clause in f.clauses() {
            s.add_clause_unchecked(clause);
        }
        if f.num_clauses() == 0 {
            s.status = Status::Sat;
        }
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// Number of clauses given at construction.
    pub fn num_original_clauses(&self) -> usize {
        self.original_clause_count
    }

    /// Irredundant clauses: original plus added ones (not learned).
    pub fn num_clauses(&self) -> usize {
        self.db_clauses.len()
    }

    pub fn num_learnts(&self) -> usize {
        self.num_learnts
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    pub fn set_deadline(&mut self, deadline: Deadline) {
        self.config.deadline = deadline;
    }

    fn check_lits(&self, lits: &[Lit]) -> Result<(), SatError> {
        for l in lits {
            if l.var().index() > self.num_vars {
                return Err(SatError::LiteralOutOfRange {
                    lit: l.to_dimacs(),
                    num_vars: self.num_vars,
                });
            }
        }
        Ok(())
    }

    /// Permanently conjoins a clause. An empty clause makes the database unsatisfiable.
    pub fn add_clause(&mut self, clause: &[Lit]) -> Result<(), SatError> {
        self.check_lits(clause)?;
        self.add_clause_unchecked(clause);
        if self.status == Status::Sat {
            self.status = Status::Unknown;
        }
        Ok(())
    }

    /// Permanently conjoins `sum coef * lit >= bound`. Coefficients must be
    /// positive and variables distinct.
    pub fn add_pb(&mut self, terms: &[(i64, Lit)], bound: i64) -> Result<(), SatError> {
        let lits: Vec<Lit> = terms.iter().map(|t| t.1).collect();
        self.check_lits(&lits)?;
        let mut vars: Vec<Var> = lits.iter().map(|l| l.var()).collect();
        vars.sort();
        vars.dedup();
        if vars.len() != terms.len() || terms.iter().any(|t| t.0 <= 0) {
            return Err(SatError::MalformedPb);
        }
        self.db_pbs.push((terms.to_vec(), bound));
        if self.status == Status::Sat {
            self.status = Status::Unknown;
        }
        if self.status == Status::Unsat || bound <= 0 {
            return Ok(());
        }
        // Saturate: no coefficient needs to exceed the bound.
        let mut sorted: Vec<(i64, Lit)> = terms.iter().map(|&(c, l)| (c.min(bound), l)).collect();
        sorted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let total: i64 = sorted.iter().map(|t| t.0).sum();
        let false_sum: i64 = sorted
            .iter()
            .filter(|t| self.lit_value(t.1) == Value::False)
            .map(|t| t.0)
            .sum();
        let idx = self.pbs.len() as u32;
        for &(c, l) in &sorted {
            self.pb_occurrences[l.code()].push((idx, c));
        }
        self.pbs.push(PbConstraint {
            terms: sorted,
            slack: total - false_sum - bound,
        });
        debug_assert!(self.trail_lim.is_empty());
        if self.pb_propagate(idx).is_some() || self.propagate().is_some() {
            self.status = Status::Unsat;
        }
        Ok(())
    }

    fn add_clause_unchecked(&mut self, clause: &[Lit]) {
        self.db_clauses.push(clause.to_vec());
        if self.status == Status::Unsat {
            return;
        }
        debug_assert!(self.trail_lim.is_empty(), "clauses are added at level 0");
        let mut lits: Vec<Lit> = Vec::with_capacity(clause.len());
        for &l in clause {
            match self.lit_value(l) {
                Value::True => return,
                Value::False => {}
                Value::Undef => {
                    if lits.contains(&!l) {
                        return;
                    }
                    if !lits.contains(&l) {
                        lits.push(l);
                    }
                }
            }
        }
        match lits.len() {
            0 => self.status = Status::Unsat,
            1 => {
                self.assign(lits[0], Reason::Decision);
                if self.propagate().is_some() {
                    self.status = Status::Unsat;
                }
            }
            _ => {
                self.attach_clause(lits, false);
            }
        }
    }

    fn attach_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watch {
            clause: idx,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watch {
            clause: idx,
            blocker: lits[0],
        });
        if learnt {
            self.num_learnts += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
        });
        idx
    }

    fn lit_value(&self, l: Lit) -> Value {
        match self.values[l.var().index() as usize] {
            Value::Undef => Value::Undef,
            v => {
                if (v == Value::True) == l.is_positive() {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        let v = l.var().index() as usize;
        debug_assert_eq!(self.values[v], Value::Undef);
        self.values[v] = if l.is_positive() { Value::True } else { Value::False };
        self.levels[v] = self.decision_level();
        self.reasons[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        for &(pb, c) in &self.pb_occurrences[(!l).code()] {
            self.pbs[pb as usize].slack -= c;
        }
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        while self.trail.len() > keep {
            let l = self.trail.pop().expect("trail longer than keep");
            let v = l.var().index();
            self.values[v as usize] = Value::Undef;
            self.phase[v as usize] = l.is_positive();
            for &(pb, c) in &self.pb_occurrences[(!l).code()] {
                self.pbs[pb as usize].slack += c;
            }
            self.heap.insert(v, &self.activity);
        }
        self.trail_lim.truncate(level as usize);
        self.qhead = self.qhead.min(keep);
    }

    fn propagate(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            if let Some(c) = self.propagate_clauses(p) {
                return Some(c);
            }
            let touched: Vec<u32> = self.pb_occurrences[(!p).code()].iter().map(|o| o.0).collect();
            for pb in touched {
                if let Some(c) = self.pb_propagate(pb) {
                    return Some(c);
                }
            }
        }
        None
    }

    fn propagate_clauses(&mut self, p: Lit) -> Option<Conflict> {
        let false_lit = !p;
        let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
        let mut i = 0;
        let mut j = 0;
        let mut conflict = None;
        while i < ws.len() {
            let w = ws[i];
            i += 1;
            if self.lit_value(w.blocker) == Value::True {
                ws[j] = w;
                j += 1;
                continue;
            }
            let ci = w.clause as usize;
            if self.clauses[ci].deleted {
                continue;
            }
            {
                let lits = &mut self.clauses[ci].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
            }
            let first = self.clauses[ci].lits[0];
            if first != w.blocker && self.lit_value(first) == Value::True {
                ws[j] = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                continue;
            }
            let mut moved = false;
            for k in 2..self.clauses[ci].lits.len() {
                let l = self.clauses[ci].lits[k];
                if self.lit_value(l) != Value::False {
                    self.clauses[ci].lits.swap(1, k);
                    self.watches[l.code()].push(Watch {
                        clause: w.clause,
                        blocker: first,
                    });
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            ws[j] = Watch {
                clause: w.clause,
                blocker: first,
            };
            j += 1;
            match self.lit_value(first) {
                Value::False => {
                    conflict = Some(Conflict::Clause(w.clause));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                }
                Value::Undef => self.assign(first, Reason::Clause(w.clause)),
                Value::True => {}
            }
        }
        ws.truncate(j);
        debug_assert!(self.watches[false_lit.code()].is_empty());
        self.watches[false_lit.code()] = ws;
        conflict
    }

    fn pb_propagate(&mut self, idx: u32) -> Option<Conflict> {
        let slack = self.pbs[idx as usize].slack;
        if slack < 0 {
            return Some(Conflict::Pb(idx));
        }
        let mut k = 0;
        loop {
            let pb = &self.pbs[idx as usize];
            let Some(&(c, l)) = pb.terms.get(k) else { break };
            if c <= slack {
                break;
            }
            k += 1;
            if self.lit_value(l) == Value::Undef {
                // Assigning `l` true never changes this constraint's slack.
                self.assign(l, Reason::Pb(idx));
            }
        }
        None
    }

    /// Literals of the clause explaining `conflict`, all false under the trail.
    fn conflict_lits(&self, conflict: Conflict) -> Vec<Lit> {
        match conflict {
            Conflict::Clause(ci) => self.clauses[ci as usize].lits.clone(),
            Conflict::Pb(pi) => self.pbs[pi as usize]
                .terms
                .iter()
                .map(|t| t.1)
                .filter(|&l| self.lit_value(l) == Value::False)
                .collect(),
        }
    }

    /// Falsified antecedents of the implied literal `l` (excluding `l`).
    fn reason_lits(&self, l: Lit) -> Vec<Lit> {
        let v = l.var().index() as usize;
        match self.reasons[v] {
            Reason::Decision => Vec::new(),
            Reason::Clause(ci) => self.clauses[ci as usize]
                .lits
                .iter()
                .copied()
                .filter(|&q| q != l)
                .collect(),
            Reason::Pb(pi) => {
                let pos = self.trail_pos[v];
                self.pbs[pi as usize]
                    .terms
                    .iter()
                    .map(|t| t.1)
                    .filter(|&q| {
                        q != l
                            && self.lit_value(q) == Value::False
                            && self.trail_pos[q.var().index() as usize] < pos
                    })
                    .collect()
            }
        }
    }

    fn bump(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn analyze(&mut self, conflict: Conflict) -> (Vec<Lit>, u32) {
        let level = self.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit::new(Var::new(1), true)];
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut antecedents = self.conflict_lits(conflict);
        let uip;
        loop {
            for q in antecedents {
                let v = q.var().index();
                if self.seen[v as usize] || self.levels[v as usize] == 0 {
                    continue;
                }
                self.seen[v as usize] = true;
                self.bump(v);
                if self.levels[v as usize] == level {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            // Next seen literal on the trail.
            let p = loop {
                index -= 1;
                let p = self.trail[index];
                if self.seen[p.var().index() as usize] {
                    break p;
                }
            };
            self.seen[p.var().index() as usize] = false;
            pending -= 1;
            if pending == 0 {
                uip = p;
                break;
            }
            antecedents = self.reason_lits(p);
        }
        learnt[0] = !uip;
        for l in &learnt[1..] {
            self.seen[l.var().index() as usize] = false;
        }
        let mut back_level = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.levels[learnt[k].var().index() as usize]
                    > self.levels[learnt[best].var().index() as usize]
                {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back_level = self.levels[learnt[1].var().index() as usize];
        }
        (learnt, back_level)
    }

    fn reduce_learnts(&mut self) {
        let Some(cap) = self.config.max_learnts else { return };
        if self.num_learnts <= cap {
            return;
        }
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && !self.is_locked(i)
            })
            .collect();
        // Longest first; keep the short ones.
        candidates.sort_by(|&a, &b| {
            self.clauses[b].lits.len().cmp(&self.clauses[a].lits.len()).then(a.cmp(&b))
        });
        let remove = (self.num_learnts - cap / 2).min(candidates.len());
        for &i in &candidates[..remove] {
            self.clauses[i].deleted = true;
            self.clauses[i].lits = Vec::new();
            self.num_learnts -= 1;
        }
    }

    fn is_locked(&self, ci: usize) -> bool {
        let first = self.clauses[ci].lits[0];
        self.lit_value(first) == Value::True
            && self.reasons[first.var().index() as usize] == Reason::Clause(ci as u32)
    }

    fn extract_model(&self) -> Model {
        Model::from_bools(
            (1..=self.num_vars as usize)
                .map(|v| self.values[v] == Value::True)
                .collect(),
        )
    }

    /// Solves the database under the given assumption literals.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveResult, SatError> {
        self.check_lits(assumptions)?;
        self.config.deadline.check()?;
        if self.status == Status::Unsat {
            return Ok(SolveResult::Unsat);
        }
        let result = match self.config.backend {
            Backend::Cdcl => self.search(assumptions)?,
            Backend::Dpll => {
                let found = dpll::solve(
                    self.num_vars,
                    &self.db_clauses,
                    &self.db_pbs,
                    assumptions,
                    self.config.deadline,
                )?;
                if found.is_none() && assumptions.is_empty() {
                    self.status = Status::Unsat;
                }
                found.map_or(SolveResult::Unsat, SolveResult::Sat)
            }
        };
        if let SolveResult::Sat(m) = &result {
            debug_assert!(self.satisfies_database(m));
            self.status = Status::Sat;
        }
        Ok(result)
    }

    /// Checks a model against every irredundant clause and PB constraint.
    pub fn satisfies_database(&self, m: &Model) -> bool {
        self.db_clauses
            .iter()
            .all(|c| c.iter().any(|&l| m.satisfies(l)))
            && self.db_pbs.iter().all(|(terms, bound)| {
                terms
                    .iter()
                    .filter(|t| m.satisfies(t.1))
                    .map(|t| t.0)
                    .sum::<i64>()
                    >= *bound
            })
    }

    fn search(&mut self, assumptions: &[Lit]) -> Result<SolveResult, SatError> {
        let mut ticker = Ticker::new(self.config.deadline, 512);
        let mut restart_index = 0u32;
        let mut conflicts_since_restart = 0u64;
        let mut restart_limit = luby(restart_index) * self.config.restart_unit;
        loop {
            if let Err(t) = ticker.tick() {
                self.backtrack(0);
                return Err(t.into());
            }
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.status = Status::Unsat;
                    return Ok(SolveResult::Unsat);
                }
                let (learnt, back_level) = self.analyze(conflict);
                self.backtrack(back_level);
                if learnt.len() == 1 {
                    self.assign(learnt[0], Reason::Decision);
                } else {
                    let first = learnt[0];
                    let ci = self.attach_clause(learnt, true);
                    self.assign(first, Reason::Clause(ci));
                }
                self.var_inc /= self.config.var_decay;
                continue;
            }
            if conflicts_since_restart >= restart_limit {
                conflicts_since_restart = 0;
                restart_index += 1;
                restart_limit = luby(restart_index) * self.config.restart_unit;
                self.backtrack(0);
                self.reduce_learnts();
                continue;
            }
            let level = self.decision_level() as usize;
            if level < assumptions.len() {
                let a = assumptions[level];
                match self.lit_value(a) {
                    Value::True => self.trail_lim.push(self.trail.len()),
                    Value::False => {
                        self.backtrack(0);
                        return Ok(SolveResult::Unsat);
                    }
                    Value::Undef => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(a, Reason::Decision);
                    }
                }
                continue;
            }
            let mut next = None;
            while let Some(v) = self.heap.pop(&self.activity) {
                if self.values[v as usize] == Value::Undef {
                    next = Some(v);
                    break;
                }
            }
            let Some(v) = next else {
                let model = self.extract_model();
                self.backtrack(0);
                return Ok(SolveResult::Sat(model));
            };
            self.decisions += 1;
            self.trail_lim.push(self.trail.len());
            let lit = Lit::new(Var::new(v), self.phase[v as usize]);
            self.assign(lit, Reason::Decision);
        }
    }
}

/// The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(i: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = u64::from(i);
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}
