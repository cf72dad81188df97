use super::{LinalgError, Matrix};

const SYM_TOL: f64 = 1e-12;
const OFF_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a real symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &Matrix<f64>) -> Result<Vec<f64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare);
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > SYM_TOL {
                return Err(LinalgError::NotSymmetric);
            }
        }
    }
    let mut m = a.to_rows();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off < OFF_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues of `I − D⁻¹A` through the similar symmetric matrix `D^{-1/2} Δ̄ D^{-1/2}`.
pub fn random_walk_eigenvalues(full: &Matrix<i64>) -> Result<Vec<f64>, LinalgError> {
    let n = full.rows();
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / (full[(i, i)] as f64).sqrt()).collect();
    let sym = Matrix::from_fn(n, n, |i, j| full[(i, j)] as f64 * inv_sqrt[i] * inv_sqrt[j]);
    symmetric_eigenvalues(&sym)
}
