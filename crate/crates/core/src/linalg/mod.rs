//! Exact integer and rational linear algebra plus a Jacobi eigensolver.

mod cvp;
mod eigen;
mod matrix;
mod rational;
mod smith;

use thiserror::Error;

pub use cvp::{cvp_wn, cvp_wn_scaled, norm_sq, project_integer, to_f64, CvpScaled};
pub use eigen::{random_walk_eigenvalues, symmetric_eigenvalues};
pub use matrix::Matrix;
pub use rational::{
    pseudoinverse, rational_inverse, rational_inverse_of, zero_sum_projector, PseudoinverseBundle,
    RationalMatrix,
};
pub use smith::{determinant, invariant_factors, smith_normal_form, SmithDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not a connected-graph Laplacian")]
    NotALaplacian,
    #[error("vector does not sum to zero")]
    NotInR0n,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("value exceeds the fixed-width fast path")]
    Overflow,
}
