use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{LinalgError, Matrix};

pub type RationalMatrix = Matrix<BigRational>;

/// Moore–Penrose inverse of a connected-graph Laplacian and the projector onto the zero-sum space.
#[derive(Debug, Clone)]
pub struct PseudoinverseBundle {
    pub pinv: RationalMatrix,
    pub projector: RationalMatrix,
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact inverse by Gauss–Jordan elimination over the rationals.
pub fn rational_inverse_of(a: &RationalMatrix) -> Result<RationalMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare);
    }
    let n = a.rows();
    let mut m = a.to_rows();
    let mut inv = RationalMatrix::identity(n).to_rows();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(LinalgError::SingularMatrix)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut().chain(inv[col].iter_mut()) {
            *x /= &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                if !m[col][j].is_zero() {
                    let d = &f * &m[col][j];
                    m[r][j] -= d;
                }
                if !inv[col][j].is_zero() {
                    let d = &f * &inv[col][j];
                    inv[r][j] -= d;
                }
            }
        }
    }
    Ok(Matrix::from_rows(inv))
}

pub fn rational_inverse(a: &Matrix<i64>) -> Result<RationalMatrix, LinalgError> {
    rational_inverse_of(&a.to_rational())
}

/// `I − J/n`.
pub fn zero_sum_projector(n: usize) -> RationalMatrix {
    let off = BigRational::new(BigInt::from(-1), BigInt::from(n));
    let diag = BigRational::one() + &off;
    Matrix::from_fn(n, n, |i, j| if i == j { diag.clone() } else { off.clone() })
}

/// Pseudoinverse of a full Laplacian: invert on the chart that drops the last coordinate, then project.
pub fn pseudoinverse(full: &Matrix<i64>) -> Result<PseudoinverseBundle, LinalgError> {
    if !full.is_square() || full.rows() < 2 {
        return Err(LinalgError::NotALaplacian);
    }
    let n = full.rows();
    for i in 0..n {
        if full.row(i).iter().sum::<i64>() != 0 {
            return Err(LinalgError::NotALaplacian);
        }
        for j in 0..n {
            if full[(i, j)] != full[(j, i)] {
                return Err(LinalgError::NotALaplacian);
            }
        }
    }
    let chart = Matrix::from_fn(n - 1, n - 1, |i, j| rat(full[(i, j)]));
    let inv = rational_inverse_of(&chart).map_err(|_| LinalgError::NotALaplacian)?;
    let embedded = Matrix::from_fn(n, n, |i, j| {
        if i < n - 1 && j < n - 1 {
            inv[(i, j)].clone()
        } else {
            BigRational::zero()
        }
    });
    let projector = zero_sum_projector(n);
    let pinv = projector.mul(&embedded).mul(&projector);
    Ok(PseudoinverseBundle { pinv, projector })
}
