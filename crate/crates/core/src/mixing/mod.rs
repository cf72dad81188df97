//! Distance-to-stationarity curves, exact evolution, Monte Carlo and lower bounds.

mod curve;
mod evolution;
mod lower;
mod montecarlo;

use thiserror::Error;

pub use curve::*;
pub use evolution::*;
pub use lower::*;
pub use montecarlo::*;

use crate::sandpile::{GroupError, SandpileError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixingError {
    #[error("spectrum has {have} eigenvalues but the group has order {need}")]
    IncompleteSpectrum { have: usize, need: String },
    #[error("group of order {order} exceeds the budget of {budget} states")]
    BudgetExceeded { order: String, budget: u64 },
    #[error("n = {0} is outside the supported range")]
    BadN(usize),
    #[error(transparent)]
    Sandpile(#[from] SandpileError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn merge(&mut self, other: &Kahan) {
        self.add(other.sum);
        self.add(-other.c);
    }
}

impl FromIterator<f64> for Kahan {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = Kahan::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}
