//! Mixing-time bounds, the inverse relationship with `β₁`, and the cosine constant.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::{SpectralError, SpectralSummary};
use crate::graph::DegreeStats;

/// Natural log of a positive big integer.
pub fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub name: &'static str,
    /// `"upper"` bounds the time needed, `"lower"` bounds the time below which the chain is far.
    pub kind: &'static str,
    pub chain: &'static str,
    /// Time from which (or up to which) the guarantee holds.
    pub time: f64,
    pub guarantee: String,
    pub source: &'static str,
}

#[derive(Debug, Clone)]
pub struct BoundInputs<'a> {
    pub n: usize,
    pub order: &'a BigInt,
    pub degrees: DegreeStats,
    pub summary: Option<&'a SpectralSummary>,
    pub eta_continuous: Option<f64>,
    pub eta_discrete: Option<f64>,
    pub epsilon: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundTable {
    /// Set when `|𝒢| = 1`: the chain is stationary from the start.
    pub trivially_mixed: bool,
    pub rows: Vec<BoundRow>,
}

pub fn tv_eigval_bounds(t_rel: f64, order: &BigInt, epsilon: f64) -> (f64, f64) {
    let lower = (1.0 / (2.0 * epsilon)).ln() * (t_rel - 1.0);
    let upper = ((0.5 * ln_big(order) - (2.0 * epsilon).ln()) * t_rel).ceil();
    (lower, upper)
}

pub fn smoothing_time(n: usize, eta: f64) -> f64 {
    PI / 16.0 * n as f64 * eta * eta
}

pub fn optimized_smoothing_time(n: usize, eta: f64, order: &BigInt, epsilon: f64) -> f64 {
    let nf = n as f64;
    nf * eta * eta / (4.0 * PI) + PI * PI / 48.0 * nf * (ln_big(order) - epsilon.ln())
}

pub fn d_star_time(n: usize, d_star: usize, epsilon: f64) -> f64 {
    let (nf, d) = (n as f64, d_star as f64);
    (d * d + d) * nf * (2.0 * (nf - 1.0) * (1.0 + 1.0 / epsilon)).ln() / 16.0
}

pub fn cutoff_upper_time(n: usize, d_star: usize, c: f64) -> f64 {
    let (nf, d) = (n as f64, d_star as f64);
    d * d * nf * nf.ln() / (4.0 * PI * PI) + nf * nf / 4.0 * d.ln() + c * d * d * nf
}

pub fn torus_upper_time(m: usize, c: f64) -> f64 {
    let mf = m as f64;
    2.5 * mf * mf * mf.ln() + c * mf * mf
}

pub fn complete_upper_time(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    nf.powi(3) * nf.ln() / (4.0 * PI * PI) + c * nf.powi(3)
}

pub fn complete_lower_time(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    nf.powi(3) * nf.ln() / (4.0 * PI * PI) - c * nf.powi(3)
}

pub fn mixing_bounds(inp: &BoundInputs) -> BoundTable {
    if inp.order.is_one() {
        return BoundTable {
            trivially_mixed: true,
            rows: Vec::new(),
        };
    }
    let eps = inp.epsilon;
    let n = inp.n;
    let d_star = inp.degrees.star;
    let mut rows = Vec::new();
    if let Some(s) = inp.summary {
        let (lo, hi) = tv_eigval_bounds(s.t_rel, inp.order, eps);
        let note = if s.sampled { " (sampled spectrum)" } else { "" };
        rows.push(BoundRow {
            name: "relaxation_lower",
            kind: "lower",
            chain: "discrete",
            time: lo,
            guarantee: format!("t_mix({eps}) >= time{note}"),
            source: "TV vs eigenvalue proposition, lower bound",
        });
        rows.push(BoundRow {
            name: "relaxation_upper",
            kind: "upper",
            chain: "discrete",
            time: hi,
            guarantee: format!("t_mix({eps}) <= time{note}"),
            source: "TV vs eigenvalue proposition, upper bound",
        });
    }
    if let Some(eta) = inp.eta_continuous {
        rows.push(BoundRow {
            name: "smoothing_continuous",
            kind: "upper",
            chain: "continuous",
            time: smoothing_time(n, eta),
            guarantee: format!("||H_t - U||_2^2 <= {eps}"),
            source: "smoothing theorem, reduced Laplacian lattice",
        });
        rows.push(BoundRow {
            name: "smoothing_optimized_continuous",
            kind: "upper",
            chain: "continuous",
            time: optimized_smoothing_time(n, eta, inp.order, eps),
            guarantee: format!("||H_t - U||_2^2 <= {}", 2.0 * eps),
            source: "optimized smoothing theorem, reduced Laplacian lattice",
        });
    }
    if let Some(eta) = inp.eta_discrete {
        rows.push(BoundRow {
            name: "smoothing_discrete",
            kind: "upper",
            chain: "both",
            time: smoothing_time(n, eta),
            guarantee: format!("max(||H_t - U||_2^2, ||P_t - U||_2^2) <= {eps}"),
            source: "smoothing theorem, full Laplacian lattice",
        });
        rows.push(BoundRow {
            name: "smoothing_optimized_discrete",
            kind: "upper",
            chain: "both",
            time: optimized_smoothing_time(n, eta, inp.order, eps),
            guarantee: format!("max(||H_t - U||_2^2, ||P_t - U||_2^2) <= {}", 2.0 * eps),
            source: "optimized smoothing theorem, full Laplacian lattice",
        });
    }
    rows.push(BoundRow {
        name: "second_degree",
        kind: "upper",
        chain: "both",
        time: d_star_time(n, d_star, eps),
        guarantee: format!("max(||H_t - U||_2^2, ||P_t - U||_2^2) <= {eps}"),
        source: "second-largest degree mixing theorem",
    });
    if inp.c >= 1.0 {
        rows.push(BoundRow {
            name: "cutoff_upper",
            kind: "upper",
            chain: "both",
            time: cutoff_upper_time(n, d_star, inp.c),
            guarantee: format!("max(||H_t - U||_2^2, ||P_t - U||_2^2) <= e^-{}", inp.c),
            source: "cutoff upper bound theorem",
        });
    }
    BoundTable {
        trivially_mixed: false,
        rows,
    }
}

/// `(1 − cos r)/r²`, the best `c` with `cos x ≤ 1 − cx²` on `|x| ≤ r`.
pub fn cos_bound_constant(r: f64) -> Result<f64, SpectralError> {
    if !(r > 0.0 && r <= 2.0 * PI) {
        return Err(SpectralError::OutOfRange(r));
    }
    Ok((1.0 - r.cos()) / (r * r))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    /// `bound − value`; negative when violated.
    pub slack: f64,
}

impl BoundCheck {
    fn upper(value: f64, bound: f64) -> Self {
        BoundCheck {
            value,
            bound,
            slack: bound - value,
        }
    }

    fn lower(value: f64, bound: f64) -> Self {
        BoundCheck {
            value,
            bound,
            slack: value - bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseReport {
    pub beta1: f64,
    /// `γ_d ≤ 4π²/(β₁²n)`.
    pub discrete: BoundCheck,
    /// `γ_c ≤ 10π²/(β₁²n)`, only when `d_min ≥ 2`; stated in the source without proof.
    pub continuous_unproved: Option<BoundCheck>,
    /// Worst slack of `d_min θ_i ≤ β_i ≤ d_max θ_i`.
    pub degree_sandwich_slack: f64,
    /// `8/(d²n) ≤ γ_d ≤ 4π²/((dθ₁)²n)` for `d`-regular graphs.
    pub expander: Option<(BoundCheck, BoundCheck)>,
    pub violations: usize,
}

impl InverseReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the inverse relationship between `γ` and `β₁`, given ascending spectra `β` of
/// the full Laplacian and `θ` of the random-walk Laplacian.
pub fn inverse_relationship_check(
    summary: &SpectralSummary,
    beta: &[f64],
    theta: &[f64],
    degrees: DegreeStats,
    n: usize,
    tol: f64,
) -> InverseReport {
    let nf = n as f64;
    let beta1 = beta[1];
    let discrete = BoundCheck::upper(summary.gamma_d, 4.0 * PI * PI / (beta1 * beta1 * nf));
    let continuous_unproved = (degrees.min >= 2)
        .then(|| BoundCheck::upper(summary.gamma_c, 10.0 * PI * PI / (beta1 * beta1 * nf)));
    let (dmin, dmax) = (degrees.min as f64, degrees.max as f64);
    let degree_sandwich_slack = beta
        .iter()
        .zip(theta)
        .map(|(&b, &t)| (b - dmin * t).min(dmax * t - b))
        .fold(f64::INFINITY, f64::min);
    let expander = (degrees.min == degrees.max).then(|| {
        let d = dmax;
        (
            BoundCheck::lower(summary.gamma_d, 8.0 / (d * d * nf)),
            BoundCheck::upper(summary.gamma_d, 4.0 * PI * PI / ((d * theta[1]).powi(2) * nf)),
        )
    });
    let mut violations = 0;
    let mut count = |s: f64| {
        if s < -tol {
            violations += 1;
        }
    };
    count(discrete.slack);
    if let Some(c) = &continuous_unproved {
        count(c.slack);
    }
    count(degree_sandwich_slack);
    if let Some((a, b)) = &expander {
        count(a.slack);
        count(b.slack);
    }
    InverseReport {
        beta1,
        discrete,
        continuous_unproved,
        degree_sandwich_slack,
        expander,
        violations,
    }
}

/// `8/(d_*²n)`.
pub fn gap_lower_bound(n: usize, d_star: usize) -> f64 {
    8.0 / ((d_star * d_star) as f64 * n as f64)
}
