use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Serialize;

use super::{exact_evolution_at, MixingError, DEFAULT_EVOLUTION_BUDGET};
use crate::families;
use crate::sandpile::{GroupModel, VertexDistribution};
use crate::spectral::{complete_lower_time, complete_upper_time, cutoff_upper_time, ln_big};

#[derive(Debug, Clone, Serialize)]
pub struct CountingRow {
    pub t: u64,
    /// `1 − 2^{t+n−1}/N`, the support-counting bound on TV.
    pub support_bound: f64,
    pub exact_tv: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub n_generators: usize,
    pub order: String,
    pub epsilon: f64,
    /// `log₂(εN) − n`; TV ≥ 1 − ε up to this time.
    pub t_bound: f64,
    pub rows: Vec<CountingRow>,
    /// Whether every available exact TV is at least `1 − ε`.
    pub consistent: bool,
}

/// Rows for every integer `t ≤ log₂(εN) − n`; `exact_tv[t]` is compared when given.
pub fn counting_lower_bound(
    n_generators: usize,
    order: &BigInt,
    epsilon: f64,
    exact_tv: Option<&[f64]>,
) -> CountingReport {
    let log2_n = ln_big(order) / std::f64::consts::LN_2;
    let t_bound = log2_n + epsilon.log2() - n_generators as f64;
    let mut rows = Vec::new();
    let mut consistent = true;
    if t_bound >= 0.0 {
        for t in 0..=t_bound.floor() as u64 {
            let support_bound = 1.0 - (t as f64 + n_generators as f64 - 1.0 - log2_n).exp2();
            let exact = exact_tv.and_then(|v| v.get(t as usize).copied());
            if let Some(tv) = exact {
                consistent &= tv >= 1.0 - epsilon;
            }
            rows.push(CountingRow {
                t,
                support_bound,
                exact_tv: exact,
            });
        }
    }
    CountingReport {
        n_generators,
        order: order.to_string(),
        epsilon,
        t_bound,
        rows,
        consistent,
    }
}

/// `0.68m² − c`, the torus time below which TV ≥ 1 − 2^{−c} for large `m`.
pub fn torus_lower_time(m: usize, c: f64) -> f64 {
    0.68 * (m * m) as f64 - c
}

/// `λ₀, …, λ₄` of the distinguishing statistic on `K_n`.
pub fn kn_eigenvalues(n: usize) -> [Complex64; 5] {
    let nf = n as f64;
    let w = Complex64::from_polar(1.0, 2.0 * PI / nf);
    let one = Complex64::new(1.0, 0.0);
    [
        one,
        one - (2.0 - 2.0 * (2.0 * PI / nf).cos()) / nf,
        one - (2.0 - 2.0 * (4.0 * PI / nf).cos()) / nf,
        one - (4.0 - 4.0 * (2.0 * PI / nf).cos()) / nf,
        one - (3.0 - 2.0 * w - w.powi(-2)) / nf,
    ]
}

/// The six eigenvalues in the expansion of `(n−1)²(n−2)²φ²` with their multiplicities.
pub fn table1_formula(n: usize) -> Vec<(Complex64, u64)> {
    let l = kn_eigenvalues(n);
    let m = n as u64;
    let (a, b, c, d) = (m - 1, m - 2, m.saturating_sub(3), m.saturating_sub(4));
    vec![
        (l[0], a * b),
        (l[1], 2 * a * b * c),
        (l[2], a * b),
        (l[3], a * b * c * d),
        (l[4], a * b * c),
        (l[4].conj(), a * b * c),
    ]
}

/// Expands `Σ f_{j,k} f_{l,m}` over `D_n × D_n` by brute force and groups equal eigenvalues.
pub fn table1_bruteforce(n: usize) -> Vec<(Complex64, u64)> {
    let nf = n as f64;
    let mut groups: Vec<(Complex64, u64)> = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n - 1)
        .flat_map(|j| (0..n - 1).filter(move |&k| k != j).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        for &(l, m) in &pairs {
            let mut z = vec![0i64; n];
            z[j] += 1;
            z[k] -= 1;
            z[l] += 1;
            z[m] -= 1;
            let lambda: Complex64 = z
                .iter()
                .map(|&e| Complex64::from_polar(1.0, 2.0 * PI * e as f64 / nf))
                .sum::<Complex64>()
                / nf;
            match groups.iter_mut().find(|(g, _)| (g - lambda).norm() < 1e-12) {
                Some(g) => g.1 += 1,
                None => groups.push((lambda, 1)),
            }
        }
    }
    groups
}

/// `φ(η) = ((n−1)(n−2))⁻¹ Σ_{j≠k} cos(2π(η_j − η_k)/n)` on the non-sink chips of `K_n`.
pub fn kn_phi(n: usize, chips: &[u64]) -> f64 {
    let nf = n as f64;
    let mut acc = 0.0;
    for (j, &a) in chips.iter().enumerate() {
        for (k, &b) in chips.iter().enumerate() {
            if j != k {
                acc += (2.0 * PI * (a as f64 - b as f64) / nf).cos();
            }
        }
    }
    acc / ((n - 1) * (n - 2)) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct KnStatistic {
    pub n: usize,
    pub t: f64,
    pub lambda1: f64,
    /// Ratio with the exact variance sum from the eigen-expansion.
    pub r_exact: f64,
    /// `R(t) = 2λ₁^{2t}/(6/n² + 5λ₁^t/n)`.
    pub r: f64,
    /// `1 − 4/(4 + R)` for each ratio.
    pub bound_exact: f64,
    pub bound: f64,
}

/// Wilson-type lower bound on TV at time `t` for the chain on `K_n`.
pub fn kn_distinguishing_statistic(n: usize, t: f64) -> Result<KnStatistic, MixingError> {
    if n < 4 {
        return Err(MixingError::BadN(n));
    }
    let nf = n as f64;
    let l = kn_eigenvalues(n);
    let l1 = l[1].re;
    let ab = ((n - 1) * (n - 2)) as f64;
    let c = (n - 3) as f64;
    let d = (n - 4) as f64;
    let pow = |z: Complex64| if t == 0.0 { Complex64::new(1.0, 0.0) } else { z.powf(t) };
    let var = 2.0 / ab + 2.0 * c / ab * l1.powf(t) + l[2].re.powf(t) / ab
        + c * d / ab * l[3].re.powf(t)
        + 2.0 * c / ab * pow(l[4]).re
        - l1.powf(2.0 * t);
    let num = 2.0 * l1.powf(2.0 * t);
    let r_exact = num / var;
    let r = num / (6.0 / (nf * nf) + 5.0 / nf * l1.powf(t));
    Ok(KnStatistic {
        n,
        t,
        lambda1: l1,
        r_exact,
        r,
        bound_exact: 1.0 - 4.0 / (4.0 + r_exact),
        bound: 1.0 - 4.0 / (4.0 + r),
    })
}

/// `1 − 100/(100 + e^{4π²c})`.
pub fn kn_lower_bound_value(c: f64) -> f64 {
    1.0 - 100.0 / (100.0 + (4.0 * PI * PI * c).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffReport {
    pub n: usize,
    pub c: f64,
    pub t_low: f64,
    pub t_high: f64,
    /// `e^{−c}`, the TV bound from `t_high` on.
    pub upper_bound: f64,
    /// `1 − e^{−35c}`, the TV bound up to `t_low`.
    pub lower_bound: f64,
    /// Time from the general cutoff upper bound with `d_* = n − 1`.
    pub general_upper_time: f64,
    pub tv_at_high: Option<f64>,
    /// `None` also when `t_low < 0`, where the lower statement is vacuous.
    pub tv_at_low: Option<f64>,
    pub high_ok: Option<bool>,
    pub low_ok: Option<bool>,
}

/// Cutoff window on `K_n`; exact columns are filled when `exact` is set and `n^{n−2}` fits the
/// evolution budget.
pub fn cutoff_report(n: usize, c: f64, exact: bool) -> Result<CutoffReport, MixingError> {
    if n < 3 {
        return Err(MixingError::BadN(n));
    }
    let t_low = complete_lower_time(n, c);
    let t_high = complete_upper_time(n, c);
    let mut rep = CutoffReport {
        n,
        c,
        t_low,
        t_high,
        upper_bound: (-c).exp(),
        lower_bound: 1.0 - (-35.0 * c).exp(),
        general_upper_time: cutoff_upper_time(n, n - 1, c),
        tv_at_high: None,
        tv_at_low: None,
        high_ok: None,
        low_ok: None,
    };
    if exact {
        let g = families::complete(n).map_err(|_| MixingError::BadN(n))?;
        let model = GroupModel::new(&g)?;
        let mu = VertexDistribution::uniform(n);
        let hi = t_high.ceil() as u64;
        let mut times = vec![hi];
        if t_low >= 0.0 {
            times.insert(0, t_low.floor() as u64);
        }
        let ev = exact_evolution_at(&model, &times, &mu, DEFAULT_EVOLUTION_BUDGET)?;
        let tv: Vec<f64> = ev.curve.tv.iter().map(|x| x.unwrap()).collect();
        let high = *tv.last().unwrap();
        rep.tv_at_high = Some(high);
        rep.high_ok = Some(high <= rep.upper_bound);
        if t_low >= 0.0 {
            rep.tv_at_low = Some(tv[0]);
            rep.low_ok = Some(tv[0] >= rep.lower_bound);
        }
    }
    Ok(rep)
}
