use std::collections::BTreeMap;
use std::fmt;

use crate::cnf::{Lit, Model, Var, Weighting};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtLeast,
    AtMost,
}

/// A linear inequality `sum c_i * l_i (>=|<=) bound` over literals.
///
/// Normalized on construction: coefficients are positive, each variable occurs
/// at most once, and negated occurrences are kept as negative literals with the
/// constant parts folded into the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbConstraint {
    terms: Vec<(i64, Lit)>,
    sense: Sense,
    bound: i64,
}

impl PbConstraint {
    pub fn new(terms: &[(i64, Lit)], sense: Sense, bound: i64) -> PbConstraint {
        // Per variable: coefficient of x, as `x` and `1 - x` contributions.
        let mut per_var: BTreeMap<Var, i64> = BTreeMap::new();
        let mut constant = 0i64;
        for &(c, l) in terms {
            if l.is_positive() {
                *per_var.entry(l.var()).or_default() += c;
            } else {
                constant += c;
                *per_var.entry(l.var()).or_default() -= c;
            }
        }
        let mut bound = bound - constant;
        let mut normalized = Vec::new();
        for (v, c) in per_var {
            if c > 0 {
                normalized.push((c, v.positive()));
            } else if c < 0 {
                // c * x = -c * (1 - x) + c
                normalized.push((-c, v.negative()));
                bound += -c;
            }
        }
        PbConstraint {
            terms: normalized,
            sense,
            bound,
        }
    }

    pub fn terms(&self) -> &[(i64, Lit)] {
        &self.terms
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    /// Equivalent `>=` form with positive coefficients.
    pub fn to_at_least(&self) -> (Vec<(i64, Lit)>, i64) {
        match self.sense {
            Sense::AtLeast => (self.terms.clone(), self.bound),
            Sense::AtMost => {
                let total: i64 = self.terms.iter().map(|t| t.0).sum();
                (
                    self.terms.iter().map(|&(c, l)| (c, !l)).collect(),
                    total - self.bound,
                )
            }
        }
    }

    /// The same inequality over variables only: `sum a_i * x_i (>=|<=) b` with
    /// signed `a_i`, obtained by expanding `1 - x` for negative literals.
    pub fn to_variable_form(&self) -> (Vec<(i64, Var)>, i64) {
        let mut bound = self.bound;
        let terms = self
            .terms
            .iter()
            .map(|&(c, l)| {
                if l.is_positive() {
                    (c, l.var())
                } else {
                    bound -= c;
                    (-c, l.var())
                }
            })
            .collect();
        (terms, bound)
    }

    pub fn lhs(&self, m: &Model) -> i64 {
        self.terms
            .iter()
            .filter(|t| m.satisfies(t.1))
            .map(|t| t.0)
            .sum()
    }

    pub fn is_satisfied(&self, m: &Model) -> bool {
        let lhs = self.lhs(m);
        match self.sense {
            Sense::AtLeast => lhs >= self.bound,
            Sense::AtMost => lhs <= self.bound,
        }
    }
}

impl fmt::Display for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, l)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let var = if l.is_positive() {
                format!("x{}", l.var())
            } else {
                format!("~x{}", l.var())
            };
            if *c == 1 {
                f.write_str(&var)?;
            } else {
                write!(f, "{c} {var}")?;
            }
        }
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        let op = match self.sense {
            Sense::AtLeast => ">=",
            Sense::AtMost => "<=",
        };
        write!(f, " {op} {}", self.bound)
    }
}

/// The clause `l_1 v ... v l_p` as `l_1 + ... + l_p >= 1`.
///
/// Returns `None` for the empty clause.
pub fn clause_to_pb(clause: &[Lit]) -> Option<PbConstraint> {
    if clause.is_empty() {
        return None;
    }
    let terms: Vec<(i64, Lit)> = clause.iter().map(|&l| (1, l)).collect();
    Some(PbConstraint::new(&terms, Sense::AtLeast, 1))
}

/// `objective(w) (>=|<=) bound` as a normalized constraint.
///
/// Each variable contributes `min(pos, neg)` unconditionally plus the
/// difference when its more expensive literal is true.
pub fn objective_constraint(w: &Weighting, sense: Sense, bound: i64) -> PbConstraint {
    let mut base = 0i64;
    let mut terms = Vec::new();
    for i in 1..=w.num_vars() {
        let v = Var::new(i);
        let (p, q) = (w.pos(v), w.neg(v));
        base += p.min(q);
        if p > q {
            terms.push((p - q, v.positive()));
        } else if q > p {
            terms.push((q - p, v.negative()));
        }
    }
    PbConstraint::new(&terms, sense, bound - base)
}
