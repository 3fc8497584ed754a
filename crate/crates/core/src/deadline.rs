//! Cooperative time budgets. Long-running loops call [`Deadline::check`] and
//! bail out with [`Timeout`] once the budget is spent.

use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("time budget exhausted")]
pub struct Timeout;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Deadline {
        Deadline(None)
    }

    pub fn after(budget: Duration) -> Deadline {
        Deadline(Some(Instant::now() + budget))
    }

    pub fn at(instant: Instant) -> Deadline {
        Deadline(Some(instant))
    }

    pub fn is_unbounded(&self) -> bool {
        self.0.is_none()
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }

    pub fn check(&self) -> Result<(), Timeout> {
        if self.expired() {
            Err(Timeout)
        } else {
            Ok(())
        }
    }
}

/// Amortizes [`Deadline::check`] over many cheap steps.
#[derive(Debug, Clone)]
pub(crate) struct Ticker {
    deadline: Deadline,
    count: u32,
    period: u32,
}

impl Ticker {
    pub fn new(deadline: Deadline, period: u32) -> Ticker {
        Ticker {
            deadline,
            count: 0,
            period: period.max(1),
        }
    }

    pub fn tick(&mut self) -> Result<(), Timeout> {
        if self.deadline.is_unbounded() {
            return Ok(());
        }
        self.count += 1;
        if self.count >= self.period {
            self.count = 0;
            self.deadline.check()?;
        }
        Ok(())
    }
}
