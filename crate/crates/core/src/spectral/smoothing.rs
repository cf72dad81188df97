//! Smoothing parameter `η_ε(Λ)`: the root of `f_Λ(s) = Σ_{x∈Λ*∖0} e^{−πs²‖x‖²} = ε`.

use rayon::prelude::*;
use serde::Serialize;

use super::SpectralError;
use crate::characters::CharacterTable;
use crate::graph::Graph;
use crate::linalg::{self, to_f64, Matrix};

pub const BRACKET: (f64, f64) = (1e-6, 1e3);
pub const REL_TOL: f64 = 1e-6;
/// Upper limit on dual-lattice points enumerated inside the ball.
pub const DEFAULT_POINT_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// `Δℤ^{n−1}`, dual `Δ⁻¹ℤ^{n−1}`.
    Continuous,
    /// `Δ̄ℤⁿ`, dual `Δ̄⁺ℤ₀ⁿ`.
    Discrete,
    /// A lattice given by a dual basis.
    Custom,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingResult {
    pub eta: f64,
    pub epsilon: f64,
    pub lattice: LatticeKind,
    /// Ball radius used by the enumeration; `None` for theta coset sums.
    pub radius: Option<f64>,
    /// Certified bound on the neglected part of `f` at `eta`.
    pub tail_bound: f64,
    pub f_at_eta: f64,
}

/// `θ(a, s) = Σ_k e^{−πs²(a+k)²}` with truncation error below 1e−15 relative.
pub fn theta(a: f64, s: f64) -> f64 {
    let a = a - a.round();
    if s >= 1.0 {
        let mut sum = (-std::f64::consts::PI * s * s * a * a).exp();
        for k in 1.. {
            let t1 = (-std::f64::consts::PI * s * s * (a + k as f64).powi(2)).exp();
            let t2 = (-std::f64::consts::PI * s * s * (a - k as f64).powi(2)).exp();
            sum += t1 + t2;
            if t1 + t2 <= 1e-17 * sum {
                break;
            }
        }
        sum
    } else {
        // Poisson: θ(a, s) = s⁻¹ Σ_k e^{−πk²/s²} cos(2πka).
        let mut sum = 1.0;
        for k in 1.. {
            let w = (-std::f64::consts::PI * (k * k) as f64 / (s * s)).exp();
            sum += 2.0 * w * (std::f64::consts::TAU * k as f64 * a).cos();
            if w < 1e-17 {
                break;
            }
        }
        sum / s
    }
}

/// Bisection on `ln s` for a strictly decreasing `f` crossing `eps`.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    eps: f64,
    mut f: impl FnMut(f64) -> Result<f64, SpectralError>,
) -> Result<f64, SpectralError> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if !(flo >= eps && fhi <= eps) {
        return Err(SpectralError::BracketFailure { lo, hi, flo, fhi });
    }
    while hi / lo - 1.0 > REL_TOL {
        let mid = (lo * hi).sqrt();
        if f(mid)? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Continuous lattice: `f(s) = Σ_h Π_j θ(x_{h,j}, s) − 1` over the character cosets.
pub fn continuous_f(table: &CharacterTable, s: f64) -> f64 {
    let e = table.exponent();
    let thetas: Vec<f64> = (0..e).map(|r| theta(r as f64 / e as f64, s)).collect();
    let partial: Vec<f64> = table
        .chunks()
        .into_par_iter()
        .map(|range| {
            let mut acc = 0.0;
            table.for_range(range, |_, res| {
                acc += res.iter().map(|&r| thetas[r as usize]).product::<f64>() / thetas[0];
            });
            acc
        })
        .collect();
    partial.iter().sum::<f64>() - 1.0
}

pub fn smoothing_continuous(table: &CharacterTable, epsilon: f64) -> Result<SmoothingResult, SpectralError> {
    if !(epsilon > 0.0) {
        return Err(SpectralError::BadEpsilon(epsilon));
    }
    if table.exponent() > 1 << 24 {
        return Err(SpectralError::BudgetExceeded("exponent too large for theta tables".into()));
    }
    let f = |s: f64| {
        let v = continuous_f(table, s);
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };
    let eta = bisect(BRACKET.0, BRACKET.1, epsilon, f)?;
    Ok(SmoothingResult {
        eta,
        epsilon,
        lattice: LatticeKind::Continuous,
        radius: None,
        tail_bound: 1e-15 * table.len() as f64,
        f_at_eta: continuous_f(table, eta),
    })
}

/// Dual-lattice vectors inside a ball, found by Fincke–Pohst enumeration.
struct BallEnumerator {
    /// Upper-triangular Cholesky factor of the Gram matrix.
    r: Vec<Vec<f64>>,
    k: usize,
}

impl BallEnumerator {
    fn new(gram: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let k = gram.len();
        let mut r = vec![vec![0.0; k]; k];
        for j in 0..k {
            let mut d = gram[j][j];
            for p in 0..j {
                d -= r[p][j] * r[p][j];
            }
            if d <= 0.0 {
                return Err(SpectralError::Degenerate);
            }
            r[j][j] = d.sqrt();
            for i in j + 1..k {
                let mut v = gram[j][i];
                for p in 0..j {
                    v -= r[p][j] * r[p][i];
                }
                r[j][i] = v / r[j][j];
            }
        }
        Ok(BallEnumerator { r, k })
    }

    /// Squared norms of all nonzero points with norm² ≤ `bound`.
    fn norms(&self, bound: f64, budget: usize) -> Result<Vec<f64>, SpectralError> {
        let mut out = Vec::new();
        let mut coords = vec![0i64; self.k];
        self.rec(self.k, bound, 0.0, &mut coords, &mut out, budget)?;
        Ok(out)
    }

    fn rec(
        &self,
        level: usize,
        bound: f64,
        partial: f64,
        coords: &mut [i64],
        out: &mut Vec<f64>,
        budget: usize,
    ) -> Result<(), SpectralError> {
        if level == 0 {
            if coords.iter().any(|&c| c != 0) {
                out.push(partial);
                if out.len() > budget {
                    return Err(SpectralError::BudgetExceeded(format!(
                        "more than {budget} dual vectors in the ball"
                    )));
                }
            }
            return Ok(());
        }
        let i = level - 1;
        let rii = self.r[i][i];
        let mut centre = 0.0;
        for j in i + 1..self.k {
            centre += self.r[i][j] * coords[j] as f64;
        }
        let centre = -centre / rii;
        let room = ((bound - partial).max(0.0)).sqrt() / rii;
        let lo = (centre - room - 1e-9).ceil() as i64;
        let hi = (centre + room + 1e-9).floor() as i64;
        for c in lo..=hi {
            let t = rii * (c as f64 - centre);
            let p = partial + t * t;
            if p <= bound * (1.0 + 1e-12) {
                coords[i] = c;
                self.rec(level - 1, bound, p, coords, out, budget)?;
            }
        }
        coords[i] = 0;
        Ok(())
    }
}

/// Certified bound on `Σ_{‖x‖ > r0} e^{−πs²‖x‖²}` from the packing estimate
/// `#{‖x‖ ≤ r} ≤ (1 + 2r/λ₁)^k` summed over shells.
pub fn shell_tail_bound(s: f64, r0: f64, lambda1: f64, k: usize) -> f64 {
    let delta = (0.25 / s).min(lambda1).max(1e-3 * lambda1);
    let kf = k as f64;
    let mut total = 0.0;
    let mut prev_log = f64::INFINITY;
    for j in 0.. {
        let rj = r0 + j as f64 * delta;
        let log_count = kf * (1.0 + 2.0 * (rj + delta) / lambda1).ln();
        let log_term = log_count - std::f64::consts::PI * s * s * rj * rj;
        let term = log_term.exp();
        total += term;
        let ratio = (log_term - prev_log).exp();
        prev_log = log_term;
        // Term ratios decrease, so past ratio 1/2 the remainder is at most one more term.
        if j > 0 && ratio <= 0.5 {
            return total + term;
        }
        if j > 10_000_000 {
            return f64::INFINITY;
        }
    }
    unreachable!()
}

/// Smoothing parameter of the lattice whose dual has the given basis (rows).
pub fn smoothing_from_dual_basis(
    basis: &[Vec<f64>],
    epsilon: f64,
    point_budget: usize,
) -> Result<SmoothingResult, SpectralError> {
    smoothing_dual_gram(&gram_of(basis), epsilon, point_budget, LatticeKind::Custom)
}

fn gram_of(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    basis
        .iter()
        .map(|a| basis.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

/// Shortest nonzero length of the lattice with this Gram matrix, and how many vectors attain it.
pub fn shortest_from_gram(gram: &[Vec<f64>]) -> Result<(f64, usize), SpectralError> {
    let en = BallEnumerator::new(gram)?;
    let bound = (0..gram.len()).map(|i| gram[i][i]).fold(f64::INFINITY, f64::min);
    let norms = en.norms(bound * (1.0 + 1e-9), DEFAULT_POINT_BUDGET)?;
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let count = norms.iter().filter(|&&x| x <= min * (1.0 + 1e-9)).count();
    Ok((min.sqrt(), count))
}

fn smoothing_dual_gram(
    gram: &[Vec<f64>],
    epsilon: f64,
    point_budget: usize,
    lattice: LatticeKind,
) -> Result<SmoothingResult, SpectralError> {
    if !(epsilon > 0.0) {
        return Err(SpectralError::BadEpsilon(epsilon));
    }
    let k = gram.len();
    let en = BallEnumerator::new(gram)?;
    let (lambda1, m1) = shortest_from_gram(gram)?;
    // f(s) ≥ m₁ e^{−πs²λ₁²} gives a lower end; the shell bound from λ₁ gives an upper end.
    let s_lo = if (m1 as f64) > epsilon {
        ((m1 as f64 / epsilon).ln() / std::f64::consts::PI).sqrt() / lambda1
    } else {
        BRACKET.0
    };
    let s_lo = s_lo.max(BRACKET.0);
    let mut s_hi = s_lo.max(1e-3);
    while shell_tail_bound(s_hi, lambda1, lambda1, k) > epsilon {
        s_hi *= 1.5;
        if s_hi > BRACKET.1 {
            return Err(SpectralError::BracketFailure {
                lo: s_lo,
                hi: s_hi,
                flo: f64::NAN,
                fhi: f64::NAN,
            });
        }
    }
    let target = 1e-9 * epsilon;
    let radius_for = |s: f64| {
        let mut r = lambda1;
        while shell_tail_bound(s, r, lambda1, k) > target {
            r *= 1.05;
        }
        r
    };
    let radius = radius_for(s_lo);
    let mut norms = en.norms(radius * radius, point_budget)?;
    norms.sort_by(f64::total_cmp);
    let eval = |s: f64| -> f64 {
        let mut acc = 0.0;
        for &q in norms.iter().rev() {
            acc += (-std::f64::consts::PI * s * s * q).exp();
        }
        acc
    };
    let f = |s: f64| Ok(eval(s));
    let eta = if eval(s_lo) <= epsilon {
        s_lo
    } else {
        bisect(s_lo, s_hi, epsilon, f)?
    };
    Ok(SmoothingResult {
        eta,
        epsilon,
        lattice,
        radius: Some(radius),
        tail_bound: shell_tail_bound(eta, radius, lambda1, k),
        f_at_eta: eval(eta),
    })
}

/// Gram matrix of the dual basis `Δ̄⁺(e_i − e_n)`, `i < n`.
pub fn discrete_dual_gram(graph: &Graph) -> Result<Vec<Vec<f64>>, SpectralError> {
    let bundle = linalg::pseudoinverse(&graph.full_laplacian())?;
    let n = graph.n();
    let p = &bundle.pinv;
    let cols: Vec<Vec<_>> = (0..n - 1)
        .map(|i| (0..n).map(|r| &p[(r, i)] - &p[(r, n - 1)]).collect())
        .collect();
    let gram = Matrix::from_fn(n - 1, n - 1, |i, j| {
        to_f64(&cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum())
    });
    Ok(gram.to_rows())
}

pub fn smoothing_discrete(graph: &Graph, epsilon: f64, point_budget: usize) -> Result<SmoothingResult, SpectralError> {
    let gram = discrete_dual_gram(graph)?;
    smoothing_dual_gram(&gram, epsilon, point_budget, LatticeKind::Discrete)
}

/// Largest successive minimum `λ_k` of an integer lattice given by its basis (rows).
///
/// Vectors up to the longest basis vector are enumerated and greedily kept while independent.
pub fn last_successive_minimum(basis: &[Vec<i64>], point_budget: usize) -> Result<f64, SpectralError> {
    let k = basis.len();
    let fb: Vec<Vec<f64>> = basis.iter().map(|b| b.iter().map(|&x| x as f64).collect()).collect();
    let gram = gram_of(&fb);
    let bound = (0..k).map(|i| gram[i][i]).fold(0.0, f64::max);
    let en = BallEnumerator::new(&gram)?;
    let mut pts = Vec::new();
    let mut coords = vec![0i64; k];
    collect_points(&en, k, bound * (1.0 + 1e-9), 0.0, &mut coords, &mut pts, point_budget)?;
    pts.sort_by(|a: &(f64, Vec<i64>), b| a.0.total_cmp(&b.0));
    let dim = basis[0].len();
    let mut echelon: Vec<Vec<f64>> = Vec::new();
    let mut last = 0.0;
    for (norm, c) in pts {
        let mut v = vec![0.0; dim];
        for (ci, b) in c.iter().zip(&fb) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += *ci as f64 * y;
            }
        }
        for e in &echelon {
            let dot: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(e) {
                *x -= dot * y;
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 * norm.sqrt().max(1.0) {
            echelon.push(v.iter().map(|x| x / len).collect());
            last = norm.sqrt();
            if echelon.len() == k {
                break;
            }
        }
    }
    Ok(last)
}

fn collect_points(
    en: &BallEnumerator,
    level: usize,
    bound: f64,
    partial: f64,
    coords: &mut [i64],
    out: &mut Vec<(f64, Vec<i64>)>,
    budget: usize,
) -> Result<(), SpectralError> {
    if level == 0 {
        if coords.iter().any(|&c| c != 0) {
            out.push((partial, coords.to_vec()));
            if out.len() > budget {
                return Err(SpectralError::BudgetExceeded("too many primal vectors".into()));
            }
        }
        return Ok(());
    }
    let i = level - 1;
    let rii = en.r[i][i];
    let centre = -(i + 1..en.k).map(|j| en.r[i][j] * coords[j] as f64).sum::<f64>() / rii;
    let room = ((bound - partial).max(0.0)).sqrt() / rii;
    let lo = (centre - room - 1e-9).ceil() as i64;
    let hi = (centre + room + 1e-9).floor() as i64;
    for c in lo..=hi {
        let t = rii * (c as f64 - centre);
        let p = partial + t * t;
        if p <= bound * (1.0 + 1e-12) {
            coords[i] = c;
            collect_points(en, level - 1, bound, p, coords, out, budget)?;
        }
    }
    coords[i] = 0;
    Ok(())
}

/// Primal bases: columns of `Δ` (continuous) or all columns of `Δ̄` but the last (discrete).
pub fn primal_basis(graph: &Graph, lattice: LatticeKind) -> Vec<Vec<i64>> {
    match lattice {
        LatticeKind::Discrete => {
            let full = graph.full_laplacian();
            let n = graph.n();
            (0..n - 1).map(|j| (0..n).map(|i| full[(i, j)]).collect()).collect()
        }
        _ => {
            let red = graph.reduced_laplacian();
            let k = red.rows();
            (0..k).map(|j| (0..k).map(|i| red[(i, j)]).collect()).collect()
        }
    }
}

/// `√(log(2k(1 + 1/ε))/π)·λ_k`, the upper bound on `η_ε` from the last successive minimum.
pub fn lambda_k_bound(lambda_k: f64, k: usize, epsilon: f64) -> f64 {
    ((2.0 * k as f64 * (1.0 + 1.0 / epsilon)).ln() / std::f64::consts::PI).sqrt() * lambda_k
}
