//! Minimal coset representatives in the two dual lattices.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::SpectralError;
use crate::characters::{CharacterTable, EigenvalueRecord, HarmonicFunction};
use crate::linalg::cvp_wn_scaled;

/// Squared lengths of the minimal representatives of one character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosetNorms {
    /// In `Δ⁻¹ℤ^{n−1}`: phases folded into `[−1/2, 1/2)`.
    pub continuous: f64,
    /// In `Δ̄⁺ℤ₀ⁿ`: the mean-centred phases minus their closest point of 𝕎ⁿ.
    pub discrete: f64,
}

/// Folds residues mod `m` into `[−m/2, m/2)`.
pub fn folded(residues: &[u64], m: u64) -> Vec<i128> {
    residues
        .iter()
        .map(|&r| {
            let r = (r % m) as i128;
            if 2 * r < m as i128 {
                r
            } else {
                r - m as i128
            }
        })
        .collect()
}

/// `‖y‖²·m²` for the continuous minimal vector.
pub fn continuous_norm_scaled(residues: &[u64], m: u64) -> i128 {
    folded(residues, m).iter().map(|x| x * x).sum()
}

/// Mean-centred phases scaled by `n·m`, and the decoded distance `‖x‖²·n·(n m)²`.
pub fn discrete_norm_scaled(residues: &[u64], m: u64) -> (Vec<i128>, i128, Vec<i128>) {
    let n = residues.len() as i128;
    let total: i128 = residues.iter().map(|&r| r as i128).sum();
    let a: Vec<i128> = residues.iter().map(|&r| n * r as i128 - total).collect();
    let res = cvp_wn_scaled(&a, n * m as i128);
    (a, res.dist_scaled, res.z)
}

pub fn coset_norms(residues: &[u64], m: u64) -> CosetNorms {
    let n = residues.len() as f64;
    let mf = m as f64;
    let cont = continuous_norm_scaled(residues, m) as f64 / (mf * mf);
    let (_, dist, _) = discrete_norm_scaled(residues, m);
    let d = n * mf;
    CosetNorms {
        continuous: cont,
        discrete: dist as f64 / (n * d * d),
    }
}

/// Exact minimal continuous representative of `h`.
pub fn continuous_vector(h: &HarmonicFunction) -> Vec<BigRational> {
    let m = BigInt::from(h.modulus());
    folded(h.residues(), h.modulus())
        .into_iter()
        .map(|x| BigRational::new(BigInt::from(x), m.clone()))
        .collect()
}

/// Exact minimal discrete representative of `h`.
pub fn discrete_vector(h: &HarmonicFunction) -> Vec<BigRational> {
    let n = h.n() as i128;
    let m = h.modulus() as i128;
    let (a, _, z) = discrete_norm_scaled(h.residues(), h.modulus());
    let zsum: i128 = z.iter().sum();
    let d = n * m;
    // x − P z = a/d − z + (Σz/n)𝟙, over the common denominator n·d.
    a.iter()
        .zip(&z)
        .map(|(&ai, &zi)| {
            let num = n * ai - n * d * zi + d * zsum;
            BigRational::new(BigInt::from(num), BigInt::from(n * d))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ShortestCosetVectors {
    /// Shortest vector of `Δ⁻¹ℤ^{n−1} \ ℤ^{n−1}`, sink coordinate dropped.
    pub y: Vec<String>,
    pub y_norm_sq: f64,
    pub y_index: u64,
    /// Shortest vector of `Δ̄⁺ℤ₀ⁿ \ 𝕎ⁿ`.
    pub z: Vec<String>,
    pub z_norm_sq: f64,
    pub z_index: u64,
    #[serde(skip)]
    pub per_character: Vec<CosetNorms>,
}

/// Minimal representatives for every character; the trivial one is excluded from the minima.
pub fn shortest_coset_vectors(table: &CharacterTable) -> Result<ShortestCosetVectors, SpectralError> {
    let e = table.exponent();
    let per_character: Vec<CosetNorms> = table
        .chunks()
        .into_par_iter()
        .map(|range| {
            let mut out = Vec::with_capacity((range.end - range.start) as usize);
            table.for_range(range, |_, res| out.push(coset_norms(res, e)));
            out
        })
        .flatten()
        .collect();
    let argmin = |f: fn(&CosetNorms) -> f64| {
        per_character
            .iter()
            .enumerate()
            .skip(1)
            .fold(None, |best: Option<(usize, f64)>, (i, c)| {
                let v = f(c);
                match best {
                    Some((_, b)) if b <= v => best,
                    _ => Some((i, v)),
                }
            })
    };
    let (yi, yn) = argmin(|c| c.continuous).ok_or(SpectralError::EmptySpectrum)?;
    let (zi, zn) = argmin(|c| c.discrete).ok_or(SpectralError::EmptySpectrum)?;
    let yh = table.character(yi as u64);
    let sink = yh.sink();
    let y = continuous_vector(&yh)
        .into_iter()
        .enumerate()
        .filter(|(v, _)| *v != sink)
        .map(|(_, q)| q.to_string())
        .collect();
    let z = discrete_vector(&table.character(zi as u64))
        .into_iter()
        .map(|q| q.to_string())
        .collect();
    Ok(ShortestCosetVectors {
        y,
        y_norm_sq: yn,
        y_index: yi as u64,
        z,
        z_norm_sq: zn,
        z_index: zi as u64,
        per_character,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichViolation {
    pub index: u64,
    pub which: &'static str,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapSandwichReport {
    pub characters: usize,
    /// Smallest slack over all inequalities; negative means a violation.
    pub worst_slack: f64,
    pub violations: Vec<SandwichViolation>,
}

/// Checks `8‖x‖²/n ≤ 1 − Re λ ≤ 2π²‖x‖²/n` (continuous vectors) and the same with `1 − |λ|`
/// (discrete vectors) for every character, plus the global sandwiches on `γ_c`, `γ_d`.
pub fn gap_sandwich_check(
    eigs: &[EigenvalueRecord],
    vectors: &ShortestCosetVectors,
    n: usize,
    tol: f64,
) -> GapSandwichReport {
    let nf = n as f64;
    let two_pi_sq = 2.0 * std::f64::consts::PI.powi(2);
    let mut worst = f64::INFINITY;
    let mut violations = Vec::new();
    let mut check = |index: u64, which: &'static str, norm: f64, value: f64| {
        let lower = 8.0 * norm / nf;
        let upper = two_pi_sq * norm / nf;
        let slack = (value - lower).min(upper - value);
        worst = worst.min(slack);
        if slack < -tol {
            violations.push(SandwichViolation {
                index,
                which,
                lower,
                value,
                upper,
                slack,
            });
        }
    };
    for (e, c) in eigs.iter().zip(&vectors.per_character) {
        check(e.index, "continuous", c.continuous, 1.0 - e.re());
        check(e.index, "discrete", c.discrete, 1.0 - e.modulus());
    }
    let nontrivial = eigs.iter().filter(|e| !e.trivial);
    let gamma_c = nontrivial.clone().map(|e| 1.0 - e.re()).fold(f64::INFINITY, f64::min);
    let gamma_d = nontrivial.map(|e| 1.0 - e.modulus()).fold(f64::INFINITY, f64::min);
    if gamma_c.is_finite() {
        check(u64::MAX, "gamma_c", vectors.y_norm_sq, gamma_c);
        check(u64::MAX, "gamma_d", vectors.z_norm_sq, gamma_d);
    }
    GapSandwichReport {
        characters: eigs.len(),
        worst_slack: worst,
        violations,
    }
}
