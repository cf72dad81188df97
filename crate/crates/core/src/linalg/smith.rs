use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::Matrix;

/// `u · a · v = s` with `u`, `v` unimodular and `s` diagonal, `d₁ | d₂ | …`.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: Matrix<BigInt>,
    pub v: Matrix<BigInt>,
    /// Diagonal of `s`, nonnegative.
    pub diagonal: Vec<BigInt>,
}

impl SmithDecomposition {
    pub fn s(&self) -> Matrix<BigInt> {
        let n = self.diagonal.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i].clone()
            } else {
                BigInt::zero()
            }
        })
    }
}

struct Work {
    a: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in &mut self.a {
            row.swap(i, j);
        }
        if let Some(v) = &mut self.v {
            for row in v {
                row.swap(i, j);
            }
        }
    }

    /// row[dst] -= q * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        fn apply(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
            let (s, d) = if src < dst {
                let (lo, hi) = m.split_at_mut(dst);
                (&lo[src], &mut hi[0])
            } else {
                let (lo, hi) = m.split_at_mut(src);
                (&hi[0], &mut lo[dst])
            };
            for (x, y) in d.iter_mut().zip(s) {
                if !y.is_zero() {
                    *x -= q * y;
                }
            }
        }
        apply(&mut self.a, dst, src, q);
        if let Some(u) = &mut self.u {
            apply(u, dst, src, q);
        }
    }

    /// col[dst] -= q * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        fn apply(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
            for row in m {
                if !row[src].is_zero() {
                    let delta = q * &row[src];
                    row[dst] -= delta;
                }
            }
        }
        apply(&mut self.a, dst, src, q);
        if let Some(v) = &mut self.v {
            apply(v, dst, src, q);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[i] {
                *x = -&*x;
            }
        }
    }
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigInt::from(u8::from(i == j)))
                .collect()
        })
        .collect()
}

fn reduce(a: &Matrix<BigInt>, track: bool) -> Work {
    let (m, n) = (a.rows(), a.cols());
    let mut w = Work {
        a: a.to_rows(),
        u: track.then(|| identity_rows(m)),
        v: track.then(|| identity_rows(n)),
    };
    for t in 0..m.min(n) {
        loop {
            // Pivot: smallest nonzero |entry|, ties by (row, col).
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = &w.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => x.abs() < w.a[pi][pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                break;
            };
            if pi != t {
                w.swap_rows(t, pi);
            }
            if pj != t {
                w.swap_cols(t, pj);
            }
            let p = w.a[t][t].clone();
            let mut clean = true;
            for i in t + 1..m {
                if w.a[i][t].is_zero() {
                    continue;
                }
                let q = &w.a[i][t] / &p;
                if !q.is_zero() {
                    w.row_axpy(i, t, &q);
                }
                if !w.a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if w.a[t][j].is_zero() {
                    continue;
                }
                let q = &w.a[t][j] / &p;
                if !q.is_zero() {
                    w.col_axpy(j, t, &q);
                }
                if !w.a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m).find(|&i| {
                w.a[i][t + 1..].iter().any(|x| !x.is_multiple_of(&p))
            });
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    w.row_axpy(t, i, &minus_one);
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
    }
    w
}

/// Smith normal form with unimodular transforms.
pub fn smith_normal_form(a: &Matrix<BigInt>) -> SmithDecomposition {
    let k = a.rows().min(a.cols());
    let w = reduce(a, true);
    let diagonal = (0..k).map(|i| w.a[i][i].clone()).collect();
    SmithDecomposition {
        u: Matrix::from_rows(w.u.expect("tracked")),
        v: Matrix::from_rows(w.v.expect("tracked")),
        diagonal,
    }
}

/// Diagonal of the Smith normal form without the transforms.
pub fn invariant_factors(a: &Matrix<BigInt>) -> Vec<BigInt> {
    let k = a.rows().min(a.cols());
    let w = reduce(a, false);
    (0..k).map(|i| w.a[i][i].clone()).collect()
}

/// Fraction-free (Bareiss) determinant.
pub fn determinant(a: &Matrix<BigInt>) -> BigInt {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut m = a.to_rows();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = val;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}
