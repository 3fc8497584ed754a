//! Propositional CNF formulas, assignments and models.
//!
//! Variables are 1-based, as in DIMACS. Literals are packed as `var << 1 | sign`
//! so that `lit.code()` can index per-literal arrays of length `2 * (n + 1)`.

mod dimacs;
mod weighting;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use dimacs::{parse_dimacs, write_dimacs};
pub use weighting::{model_value, parse_weights, write_weights, Weighting, WeightingError};

/// Hard cap on the number of variables [`brute_force_models`] will enumerate.
pub const BRUTE_FORCE_MAX_VARS: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on index 0; variable indices are 1-based.
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, for indexing per-variable arrays.
    pub fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Builds a literal from its signed DIMACS form. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Lit> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX >> 1) {
            return None;
        }
        Some(Lit::new(Var(value.unsigned_abs() as u32), value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code in `2..2n+2`.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("assignment covers {got} variables, formula has {expected}")]
    SizeMismatch { expected: u32, got: u32 },
    #[error("brute-force enumeration refused for {0} variables (limit {BRUTE_FORCE_MAX_VARS})")]
    TooManyVariables(u32),
}

/// A CNF formula over variables `1..=num_vars`.
///
/// Clauses are normalized on construction: duplicate literals are removed and
/// tautological clauses are dropped. An empty clause stands for falsity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn from_clauses<I, C>(num_vars: u32, clauses: I) -> Result<CnfFormula, CnfError>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = Lit>,
    {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_clause(c)?;
        }
        Ok(f)
    }

    /// Convenience constructor from signed DIMACS integers.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i64]]) -> Result<CnfFormula, CnfError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            let lits = c
                .iter()
                .map(|&v| {
                    Lit::from_dimacs(v).ok_or(CnfError::LiteralOutOfRange { lit: v, num_vars })
                })
                .collect::<Result<Vec<_>, _>>()?;
            f.add_clause(lits)?;
        }
        Ok(f)
    }

    /// Adds a clause. Returns `Ok(false)` when the clause was a tautology and dropped.
    pub fn add_clause<C: IntoIterator<Item = Lit>>(&mut self, clause: C) -> Result<bool, CnfError> {
        let mut lits: Vec<Lit> = Vec::new();
        for lit in clause {
            if lit.var().0 > self.num_vars {
                return Err(CnfError::LiteralOutOfRange {
                    lit: lit.to_dimacs(),
                    num_vars: self.num_vars,
                });
            }
            if lits.contains(&!lit) {
                return Ok(false);
            }
            if !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        self.clauses.push(lits);
        Ok(true)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.num_vars).map(Var)
    }

    /// True if the formula contains the empty clause.
    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }

    /// Clause multiset equality, ignoring clause order and literal order.
    pub fn same_clauses(&self, other: &CnfFormula) -> bool {
        if self.num_vars != other.num_vars || self.clauses.len() != other.clauses.len() {
            return false;
        }
        let canon = |f: &CnfFormula| {
            let mut cs: Vec<Vec<Lit>> = f
                .clauses
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.sort();
                    c
                })
                .collect();
            cs.sort();
            cs
        };
        canon(self) == canon(other)
    }
}

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Undetermined,
}

/// A possibly partial assignment over variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![None; num_vars as usize],
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.slot()).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.slot()] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        self.values[var.slot()] = None;
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn from_lits(num_vars: u32, lits: &[Lit]) -> Assignment {
        let mut a = Assignment::empty(num_vars);
        for l in lits {
            a.set(l.var(), l.is_positive());
        }
        a
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn to_model(&self) -> Option<Model> {
        self.values
            .iter()
            .copied()
            .collect::<Option<Vec<bool>>>()
            .map(Model)
    }
}

/// A total truth assignment. Produced by solvers and circuit queries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn from_bools(values: Vec<bool>) -> Model {
        Model(values)
    }

    /// Builds the model of `num_vars` variables in which exactly `true_vars` are true.
    pub fn from_true_vars(num_vars: u32, true_vars: &[u32]) -> Model {
        let mut values = vec![false; num_vars as usize];
        for &v in true_vars {
            values[(v - 1) as usize] = true;
        }
        Model(values)
    }

    pub fn num_vars(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn value(&self, var: Var) -> bool {
        self.0[var.slot()]
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.0
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| Lit::new(Var(i as u32 + 1), b))
    }

    pub fn count_true(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// The blocking clause: the disjunction of the negated model literals.
    pub fn blocking_clause(&self) -> Vec<Lit> {
        self.lits().map(|l| !l).collect()
    }

    pub fn to_assignment(&self) -> Assignment {
        Assignment {
            values: self.0.iter().map(|&b| Some(b)).collect(),
        }
    }
}

/// DIMACS-style literal list terminated by `0`.
impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lit in self.lits() {
            write!(f, "{} ", lit)?;
        }
        write!(f, "0")
    }
}

pub fn evaluate(f: &CnfFormula, a: &Assignment) -> Truth {
    let mut undetermined = false;
    for clause in f.clauses() {
        let mut clause_open = false;
        let mut satisfied = false;
        for &lit in clause {
            match a.lit_value(lit) {
                Some(true) => {
                    satisfied = true;
                    break;
                }
                Some(false) => {}
                None => clause_open = true,
            }
        }
        if satisfied {
            continue;
        }
        if !clause_open {
            return Truth::False;
        }
        undetermined = true;
    }
    if undetermined {
        Truth::Undetermined
    } else {
        Truth::True
    }
}

/// Total-model check, cheaper than [`evaluate`].
pub fn is_model(f: &CnfFormula, m: &Model) -> bool {
    m.num_vars() == f.num_vars()
        && f
            .clauses()
            .iter()
            .all(|c| c.iter().any(|&l| m.satisfies(l)))
}

/// Enumerates every model by walking all `2^n` assignments.
///
/// Assignments are visited in lexicographic order with variable 1 as the most
/// significant position and `false < true`.
pub fn brute_force_models(f: &CnfFormula) -> Result<Vec<Model>, CnfError> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(CnfError::TooManyVariables(n));
    }
    // Clause masks over bit (n - var): positive and negative literal sets.
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(p, q), l| {
                let bit = 1u32 << (n - l.var().0);
                if l.is_positive() {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    let mut out = Vec::new();
    for bits in 0u32..(1u32 << n) {
        if masks.iter().all(|&(p, q)| bits & p != 0 || !bits & q != 0) {
            out.push(Model(
                (1..=n).map(|v| bits & (1 << (n - v)) != 0).collect(),
            ));
        }
    }
    Ok(out)
}
