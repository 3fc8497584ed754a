//! Reference DPLL: chronological backtracking, clause unit propagation,
//! lowest-index branching with `false` first. Pseudo-Boolean constraints are
//! only evaluated once every variable is assigned.

use crate::cnf::{Lit, Model};
use crate::deadline::{Deadline, Ticker, Timeout};

struct Dpll<'a> {
    clauses: &'a [Vec<Lit>],
    pbs: &'a [(Vec<(i64, Lit)>, i64)],
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
    ticker: Ticker,
}

pub(super) fn solve(
    num_vars: u32,
    clauses: &[Vec<Lit>],
    pbs: &[(Vec<(i64, Lit)>, i64)],
    assumptions: &[Lit],
    deadline: Deadline,
) -> Result<Option<Model>, Timeout> {
    let mut d = Dpll {
        clauses,
        pbs,
        values: vec![None; num_vars as usize + 1],
        trail: Vec::new(),
        ticker: Ticker::new(deadline, 256),
    };
    for &a in assumptions {
        match d.lit_value(a) {
            Some(true) => {}
            Some(false) => return Ok(None),
            None => d.set(a),
        }
    }
    if !d.unit_propagate() {
        return Ok(None);
    }
    d.search(1)
}

impl Dpll<'_> {
    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.values[l.var().index() as usize].map(|v| v == l.is_positive())
    }

    fn set(&mut self, l: Lit) {
        self.values[l.var().index() as usize] = Some(l.is_positive());
        self.trail.push(l.var().index());
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let v = self.trail.pop().expect("nonempty trail");
            self.values[v as usize] = None;
        }
    }

    /// Returns false on a falsified clause.
    fn unit_propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for c in self.clauses {
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &l in c {
                    match self.lit_value(l) {
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
                    0 => return false,
                    1 => {
                        self.set(open.expect("one open literal"));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn pbs_hold(&self) -> bool {
        self.pbs.iter().all(|(terms, bound)| {
            terms
                .iter()
                .filter(|t| self.lit_value(t.1) == Some(true))
                .map(|t| t.0)
                .sum::<i64>()
                >= *bound
        })
    }

    fn search(&mut self, from: u32) -> Result<Option<Model>, Timeout> {
        self.ticker.tick()?;
        let next = (from..self.values.len() as u32).find(|&v| self.values[v as usize].is_none());
        let Some(v) = next else {
            if !self.pbs_hold() {
                return Ok(None);
            }
            return Ok(Some(Model::from_bools(
                self.values[1..].iter().map(|b| b.expect("total")).collect(),
            )));
        };
        for polarity in [false, true] {
            let mark = self.trail.len();
            self.set(Lit::new(crate::cnf::Var::new(v), polarity));
            if self.unit_propagate() {
                if let Some(m) = self.search(v + 1)? {
                    return Ok(Some(m));
                }
            }
            self.undo_to(mark);
        }
        Ok(None)
    }
}
