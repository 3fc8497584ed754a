//! Analyses over the CNF representation, driven by the SAT engine.
//!
//! Enumeration and counting block each found model with its negation.
//! Optimization is a linear search: after each model of value `v` the
//! objective bound is tightened past `v` until the solver reports
//! unsatisfiability.

mod pb;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, Model, Var, Weighting, WeightingError};
use crate::deadline::{Deadline, Timeout};
use crate::sat::{Backend, SatError, SolveResult, Solver, SolverConfig};
use crate::{Direction, Limit};

pub use pb::{clause_to_pb, objective_constraint, PbConstraint, Sense};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DirectError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("weighting covers {weights} variables but the formula has {formula}")]
    WeightingSize { weights: u32, formula: u32 },
    #[error(transparent)]
    Weighting(#[from] WeightingError),
    #[error("step budget of {0} solver calls exhausted")]
    BudgetExceeded(u64),
    #[error("k must be at least 1")]
    ZeroK,
}

impl DirectError {
    pub fn is_timeout(&self) -> bool {
        matches!(self, DirectError::Sat(SatError::Timeout(_)))
    }
}

impl From<Timeout> for DirectError {
    fn from(t: Timeout) -> Self {
        DirectError::Sat(SatError::Timeout(t))
    }
}

#[derive(Debug, Clone, Default)]
pub struct DirectOptions {
    pub deadline: Deadline,
    /// Use the DPLL backend instead of CDCL.
    pub dpll: bool,
}

impl DirectOptions {
    pub fn with_deadline(deadline: Deadline) -> DirectOptions {
        DirectOptions {
            deadline,
            ..DirectOptions::default()
        }
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            backend: if self.dpll { Backend::Dpll } else { Backend::Cdcl },
            deadline: self.deadline,
            ..SolverConfig::default()
        }
    }
}

/// A model together with its objective value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub model: Model,
    pub value: i64,
}

fn solver_with(
    f: &CnfFormula,
    clauses: &[Vec<Lit>],
    pbs: &[PbConstraint],
    opts: &DirectOptions,
) -> Result<Solver, DirectError> {
    let mut s = Solver::with_config(f, opts.solver_config());
    for c in clauses {
        s.add_clause(c)?;
    }
    for pb in pbs {
        add_pb(&mut s, pb)?;
    }
    Ok(s)
}

fn add_pb(s: &mut Solver, pb: &PbConstraint) -> Result<(), DirectError> {
    let (terms, bound) = pb.to_at_least();
    s.add_pb(&terms, bound)?;
    Ok(())
}

fn check_weighting(f: &CnfFormula, w: &Weighting) -> Result<(), DirectError> {
    if w.num_vars() != f.num_vars() {
        return Err(DirectError::WeightingSize {
            weights: w.num_vars(),
            formula: f.num_vars(),
        });
    }
    Ok(())
}

/// One model, if any.
pub fn sat_direct(f: &CnfFormula, opts: &DirectOptions) -> Result<Option<Model>, DirectError> {
    let mut s = Solver::with_config(f, opts.solver_config());
    Ok(s.solve(&[])?.into_model())
}

/// Enumerates distinct models by repeatedly solving and blocking the last one.
pub fn enumerate_direct(
    f: &CnfFormula,
    limit: Limit,
    opts: &DirectOptions,
) -> Result<Vec<Model>, DirectError> {
    let mut s = Solver::with_config(f, opts.solver_config());
    let mut out = Vec::new();
    while limit.allows(out.len()) {
        match s.solve(&[])? {
            SolveResult::Sat(m) => {
                s.add_clause(&m.blocking_clause())?;
                out.push(m);
            }
            SolveResult::Unsat => break,
        }
    }
    Ok(out)
}

/// Counts models by enumeration. `budget` caps the number of solver calls.
pub fn count_direct(
    f: &CnfFormula,
    budget: Option<u64>,
    opts: &DirectOptions,
) -> Result<BigUint, DirectError> {
    let mut s = Solver::with_config(f, opts.solver_config());
    let mut count = BigUint::from(0u32);
    let mut calls = 0u64;
    loop {
        if let Some(b) = budget {
            if calls >= b {
                return Err(DirectError::BudgetExceeded(b));
            }
        }
        calls += 1;
        match s.solve(&[])? {
            SolveResult::Sat(m) => {
                count += 1u32;
                s.add_clause(&m.blocking_clause())?;
            }
            SolveResult::Unsat => return Ok(count),
        }
    }
}

fn linear_search(
    mut s: Solver,
    w: &Weighting,
    dir: Direction,
) -> Result<Option<OptResult>, DirectError> {
    let mut best: Option<OptResult> = None;
    while let SolveResult::Sat(m) = s.solve(&[])? {
        let value = w.value(&m);
        debug_assert!(best.as_ref().is_none_or(|b| dir.better(value, b.value)));
        let tighter = match dir {
            Direction::Min => objective_constraint(w, Sense::AtMost, value - 1),
            Direction::Max => objective_constraint(w, Sense::AtLeast, value + 1),
        };
        best = Some(OptResult { model: m, value });
        add_pb(&mut s, &tighter)?;
    }
    Ok(best)
}

/// Optimal model under `w` via linear search on the objective; `None` if
/// the formula is unsatisfiable.
pub fn optimize_direct(
    f: &CnfFormula,
    w: &Weighting,
    dir: Direction,
    opts: &DirectOptions,
) -> Result<Option<OptResult>, DirectError> {
    check_weighting(f, w)?;
    linear_search(solver_with(f, &[], &[], opts)?, w, dir)
}

/// A soft unit clause and the cost of violating it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftClause {
    pub lit: Lit,
    pub weight: i64,
}

/// Soft unit clauses realizing `w` as a weighted partial MaxSAT objective.
///
/// Minimization: a literal `~x` of cost `k` yields the soft clause `(x)` of
/// weight `k`. Maximization: the same literal yields `(x)` with weight
/// `M - k`; `offset` defaults to the largest literal cost. Zero-weight soft
/// clauses are omitted.
pub fn maxsat_weights(
    w: &Weighting,
    dir: Direction,
    offset: Option<i64>,
) -> Result<Vec<SoftClause>, DirectError> {
    let m = offset.unwrap_or_else(|| w.max_literal_weight());
    if dir == Direction::Max && m < w.max_literal_weight() {
        return Err(DirectError::Weighting(WeightingError::Negative(
            m - w.max_literal_weight(),
        )));
    }
    let weight_of = |cost: i64| match dir {
        Direction::Min => cost,
        Direction::Max => m - cost,
    };
    let mut out = Vec::new();
    for i in 1..=w.num_vars() {
        let v = Var::new(i);
        // (x) is violated exactly when ~x holds, and vice versa.
        for (soft, violated_by) in [(v.positive(), v.negative()), (v.negative(), v.positive())] {
            let weight = weight_of(w.lit_weight(violated_by));
            if weight > 0 {
                out.push(SoftClause { lit: soft, weight });
            }
        }
    }
    Ok(out)
}

/// Optimization through the MaxSAT mapping: minimize the violated soft
/// weight with a linear search that stops as soon as the trivial lower bound
/// (per variable, the cheaper violation) is reached.
pub fn optimize_maxsat_emulation(
    f: &CnfFormula,
    w: &Weighting,
    dir: Direction,
    opts: &DirectOptions,
) -> Result<Option<OptResult>, DirectError> {
    check_weighting(f, w)?;
    let soft = maxsat_weights(w, dir, None)?;
    // Penalty as a weighting: pos[v] is paid when x_v holds (violating (~x_v)).
    let n = w.num_vars();
    let mut pos = vec![0i64; n as usize];
    let mut neg = vec![0i64; n as usize];
    for sc in &soft {
        let slot = sc.lit.var().slot();
        if sc.lit.is_positive() {
            neg[slot] += sc.weight;
        } else {
            pos[slot] += sc.weight;
        }
    }
    let lower_bound: i64 = pos.iter().zip(&neg).map(|(p, q)| *p.min(q)).sum();
    let penalty = Weighting::from_vectors(pos, neg)?;
    let mut s = solver_with(f, &[], &[], opts)?;
    let mut best: Option<Model> = None;
    while let SolveResult::Sat(m) = s.solve(&[])? {
        let cost = penalty.value(&m);
        best = Some(m);
        if cost <= lower_bound {
            break;
        }
        add_pb(&mut s, &objective_constraint(&penalty, Sense::AtMost, cost - 1))?;
    }
    Ok(best.map(|model| OptResult {
        value: w.value(&model),
        model,
    }))
}

/// Stopping rule for [`topk_configs_direct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopKStop {
    /// Up to `k` best models, across value changes.
    #[default]
    KBest,
    /// Stop at the first value change: only co-optimal models, at most `k`.
    FirstValueChange,
}

/// The `k` best models: optimize, emit, block the model, re-optimize.
/// Values are weakly monotone in the optimization direction.
pub fn topk_configs_direct(
    f: &CnfFormula,
    w: &Weighting,
    k: usize,
    dir: Direction,
    stop: TopKStop,
    opts: &DirectOptions,
) -> Result<Vec<OptResult>, DirectError> {
    check_weighting(f, w)?;
    if k == 0 {
        return Err(DirectError::ZeroK);
    }
    let mut blocks: Vec<Vec<Lit>> = Vec::new();
    let mut out: Vec<OptResult> = Vec::new();
    while out.len() < k {
        let Some(r) = linear_search(solver_with(f, &blocks, &[], opts)?, w, dir)? else {
            break;
        };
        if stop == TopKStop::FirstValueChange && out.first().is_some_and(|o| o.value != r.value) {
            break;
        }
        blocks.push(r.model.blocking_clause());
        out.push(r);
    }
    Ok(out)
}

/// The `k` best distinct objective values: after each optimum `v`, a hard
/// constraint excludes every model of value `v` or better.
pub fn topk_values_direct(
    f: &CnfFormula,
    w: &Weighting,
    k: usize,
    dir: Direction,
    opts: &DirectOptions,
) -> Result<Vec<i64>, DirectError> {
    check_weighting(f, w)?;
    if k == 0 {
        return Err(DirectError::ZeroK);
    }
    let mut hard: Vec<PbConstraint> = Vec::new();
    let mut out = Vec::new();
    while out.len() < k {
        let Some(r) = linear_search(solver_with(f, &[], &hard, opts)?, w, dir)? else {
            break;
        };
        hard.push(match dir {
            Direction::Min => objective_constraint(w, Sense::AtLeast, r.value + 1),
            Direction::Max => objective_constraint(w, Sense::AtMost, r.value - 1),
        });
        out.push(r.value);
    }
    Ok(out)
}
