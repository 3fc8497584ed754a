use std::fmt::Write;

use thiserror::Error;

use super::{Lit, Model, Var};

/// Bound on the total objective range. Sums of weights and the offsets used
/// when normalizing objective constraints stay far from `i64` overflow.
const MAX_TOTAL: i64 = i64::MAX / 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightingError {
    #[error("a weighting needs at least one variable")]
    NoVariables,
    #[error("negative weight {0}")]
    Negative(i64),
    #[error("variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { var: i64, num_vars: u32 },
    #[error("objective range overflows 64-bit arithmetic")]
    Overflow,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Per-literal non-negative integer weights defining the linear objective
/// `sum_i pos[i] * x_i + neg[i] * (1 - x_i)`.
///
/// Defaults can be changed after construction; they apply to every variable
/// that has not been given an explicit weight with [`Weighting::set_weight`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weighting {
    default_pos: i64,
    default_neg: i64,
    pos: Vec<i64>,
    neg: Vec<i64>,
    overridden: Vec<bool>,
}

impl Weighting {
    pub fn new(num_vars: u32, default_pos: i64, default_neg: i64) -> Result<Weighting, WeightingError> {
        if num_vars == 0 {
            return Err(WeightingError::NoVariables);
        }
        check_weight(default_pos)?;
        check_weight(default_neg)?;
        let n = num_vars as usize;
        let w = Weighting {
            default_pos,
            default_neg,
            pos: vec![default_pos; n],
            neg: vec![default_neg; n],
            overridden: vec![false; n],
        };
        w.check_range()?;
        Ok(w)
    }

    /// Unit cost per selected variable: the "fewest features" objective.
    pub fn unit_positive(num_vars: u32) -> Result<Weighting, WeightingError> {
        Weighting::new(num_vars, 1, 0)
    }

    pub fn from_vectors(pos: Vec<i64>, neg: Vec<i64>) -> Result<Weighting, WeightingError> {
        assert_eq!(pos.len(), neg.len(), "weight vectors differ in length");
        let mut w = Weighting::new(pos.len() as u32, 0, 0)?;
        for (i, (p, q)) in pos.into_iter().zip(neg).enumerate() {
            w.set_weight(Var::new(i as u32 + 1), p, q)?;
        }
        Ok(w)
    }

    pub fn num_vars(&self) -> u32 {
        self.pos.len() as u32
    }

    pub fn set_weight(&mut self, var: Var, pos: i64, neg: i64) -> Result<(), WeightingError> {
        self.check_var(var)?;
        check_weight(pos)?;
        check_weight(neg)?;
        let i = var.slot();
        let saved = (self.pos[i], self.neg[i], self.overridden[i]);
        self.pos[i] = pos;
        self.neg[i] = neg;
        self.overridden[i] = true;
        if let Err(e) = self.check_range() {
            (self.pos[i], self.neg[i], self.overridden[i]) = saved;
            return Err(e);
        }
        Ok(())
    }

    pub fn set_default_positive(&mut self, value: i64) -> Result<(), WeightingError> {
        self.set_defaults(value, self.default_neg)
    }

    pub fn set_default_negative(&mut self, value: i64) -> Result<(), WeightingError> {
        self.set_defaults(self.default_pos, value)
    }

    fn set_defaults(&mut self, pos: i64, neg: i64) -> Result<(), WeightingError> {
        check_weight(pos)?;
        check_weight(neg)?;
        let saved = self.clone();
        self.default_pos = pos;
        self.default_neg = neg;
        for i in 0..self.pos.len() {
            if !self.overridden[i] {
                self.pos[i] = pos;
                self.neg[i] = neg;
            }
        }
        if let Err(e) = self.check_range() {
            *self = saved;
            return Err(e);
        }
        Ok(())
    }

    pub fn default_positive(&self) -> i64 {
        self.default_pos
    }

    pub fn default_negative(&self) -> i64 {
        self.default_neg
    }

    pub fn pos(&self, var: Var) -> i64 {
        self.pos[var.slot()]
    }

    pub fn neg(&self, var: Var) -> i64 {
        self.neg[var.slot()]
    }

    /// Weight contributed when `lit` is true.
    pub fn lit_weight(&self, lit: Lit) -> i64 {
        if lit.is_positive() {
            self.pos(lit.var())
        } else {
            self.neg(lit.var())
        }
    }

    /// Objective value of a total model.
    pub fn value(&self, m: &Model) -> i64 {
        assert_eq!(m.num_vars(), self.num_vars(), "model/weighting size mismatch");
        m.lits().map(|l| self.lit_weight(l)).sum()
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: i64) -> Result<Weighting, WeightingError> {
        let mul = |v: i64| v.checked_mul(factor).ok_or(WeightingError::Overflow);
        let mut w = self.clone();
        w.default_pos = mul(self.default_pos)?;
        w.default_neg = mul(self.default_neg)?;
        for i in 0..w.pos.len() {
            w.pos[i] = mul(self.pos[i])?;
            w.neg[i] = mul(self.neg[i])?;
        }
        check_weight(factor)?;
        w.check_range()?;
        Ok(w)
    }

    /// Largest single literal weight.
    pub fn max_literal_weight(&self) -> i64 {
        self.pos.iter().chain(&self.neg).copied().max().unwrap_or(0)
    }

    fn check_var(&self, var: Var) -> Result<(), WeightingError> {
        if var.index() > self.num_vars() {
            return Err(WeightingError::VarOutOfRange {
                var: i64::from(var.index()),
                num_vars: self.num_vars(),
            });
        }
        Ok(())
    }

    fn check_range(&self) -> Result<(), WeightingError> {
        let mut total: i64 = 0;
        for (p, q) in self.pos.iter().zip(&self.neg) {
            total = total
                .checked_add((*p).max(*q))
                .filter(|t| *t <= MAX_TOTAL)
                .ok_or(WeightingError::Overflow)?;
        }
        Ok(())
    }
}

fn check_weight(w: i64) -> Result<(), WeightingError> {
    if w < 0 {
        Err(WeightingError::Negative(w))
    } else if w > MAX_TOTAL {
        Err(WeightingError::Overflow)
    } else {
        Ok(())
    }
}

/// Objective value of `m` under `w`.
pub fn model_value(w: &Weighting, m: &Model) -> i64 {
    w.value(m)
}

/// Parses a weights file: a header `w <n> <default_pos> <default_neg>`
/// followed by `<var> <pos> <neg>` override lines. `c` lines are comments.
pub fn parse_weights(text: &str) -> Result<Weighting, WeightingError> {
    let mut weighting: Option<Weighting> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| WeightingError::Syntax {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let nums = |fs: &[&str]| -> Result<Vec<i64>, WeightingError> {
            fs.iter()
                .map(|s| s.parse::<i64>().map_err(|_| syntax(format!("invalid number `{s}`"))))
                .collect()
        };
        match weighting.as_mut() {
            None => {
                if fields.len() != 4 || fields[0] != "w" {
                    return Err(syntax("expected header `w <n> <default_pos> <default_neg>`".into()));
                }
                let v = nums(&fields[1..])?;
                let n = u32::try_from(v[0]).map_err(|_| syntax("invalid variable count".into()))?;
                weighting = Some(Weighting::new(n, v[1], v[2])?);
            }
            Some(w) => {
                if fields.len() != 3 {
                    return Err(syntax("expected `<var> <pos> <neg>`".into()));
                }
                let v = nums(&fields)?;
                if v[0] < 1 || v[0] > i64::from(w.num_vars()) {
                    return Err(WeightingError::VarOutOfRange {
                        var: v[0],
                        num_vars: w.num_vars(),
                    });
                }
                w.set_weight(Var::new(v[0] as u32), v[1], v[2])?;
            }
        }
    }
    weighting.ok_or(WeightingError::Syntax {
        line: 0,
        message: "missing `w` header".into(),
    })
}

/// Writes a weights file; only variables whose weights differ from the defaults
/// get an override line.
pub fn write_weights(w: &Weighting) -> String {
    let mut out = String::new();
    writeln!(out, "w {} {} {}", w.num_vars(), w.default_pos, w.default_neg).unwrap();
    for i in 0..w.pos.len() {
        if w.pos[i] != w.default_pos || w.neg[i] != w.default_neg {
            writeln!(out, "{} {} {}", i + 1, w.pos[i], w.neg[i]).unwrap();
        }
    }
    out
}
