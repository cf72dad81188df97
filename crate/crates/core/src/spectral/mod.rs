//! Spectral gaps, dual-lattice vectors, smoothing parameter and mixing bounds.

mod bounds;
mod smoothing;
mod summary;
mod vectors;

use thiserror::Error;

pub use bounds::*;
pub use smoothing::*;
pub use summary::*;
pub use vectors::*;

use crate::characters::CharacterError;
use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("spectrum has no nontrivial eigenvalue")]
    EmptySpectrum,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("bisection bracket [{lo}, {hi}] does not straddle epsilon (f = {flo}, {fhi})")]
    BracketFailure { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("Gram matrix is not positive definite")]
    Degenerate,
    #[error("argument {0} out of range")]
    OutOfRange(f64),
    #[error("{0} violation(s) found, worst slack {1:e}")]
    ViolationFound(usize, f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Character(#[from] CharacterError),
}
