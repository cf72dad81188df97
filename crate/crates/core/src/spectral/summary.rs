use serde::Serialize;

use super::SpectralError;
use crate::characters::EigenvalueRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// `1 − max |λ_h|` over nontrivial `h`.
    pub gamma_d: f64,
    /// `min (1 − Re λ_h)` over nontrivial `h`.
    pub gamma_c: f64,
    pub lambda_star: f64,
    pub t_rel: f64,
    /// Character index attaining `gamma_d`.
    pub witness_d: u64,
    /// Character index attaining `gamma_c`.
    pub witness_c: u64,
    /// Number of nontrivial eigenvalues examined.
    pub count: usize,
    /// When set the gaps are upper bounds from a sample.
    pub sampled: bool,
}

pub fn spectral_summary(
    eigs: &[EigenvalueRecord],
    sampled: bool,
) -> Result<SpectralSummary, SpectralError> {
    let mut best_mod: Option<(f64, u64)> = None;
    let mut best_re: Option<(f64, u64)> = None;
    let mut count = 0;
    for e in eigs.iter().filter(|e| !e.trivial) {
        count += 1;
        let m = e.modulus();
        if best_mod.map_or(true, |(b, _)| m > b) {
            best_mod = Some((m, e.index));
        }
        let gap = 1.0 - e.re();
        if best_re.map_or(true, |(b, _)| gap < b) {
            best_re = Some((gap, e.index));
        }
    }
    let (lambda_star, witness_d) = best_mod.ok_or(SpectralError::EmptySpectrum)?;
    let (gamma_c, witness_c) = best_re.ok_or(SpectralError::EmptySpectrum)?;
    let gamma_d = 1.0 - lambda_star;
    Ok(SpectralSummary {
        gamma_d,
        gamma_c,
        lambda_star,
        t_rel: 1.0 / gamma_d,
        witness_d,
        witness_c,
        count,
        sampled,
    })
}
