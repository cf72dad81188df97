use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::{Kahan, MixingError};
use crate::characters::EigenvalueRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainTime {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    ExactSpectral,
    ExactEvolution,
    MonteCarlo,
}

impl CurveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMode::ExactSpectral => "exact-spectral",
            CurveMode::ExactEvolution => "exact-evolution",
            CurveMode::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingCurve {
    pub mode: CurveMode,
    pub chain: ChainTime,
    pub times: Vec<f64>,
    pub l2sq: Vec<Option<f64>>,
    pub tv: Vec<Option<f64>>,
    /// Bootstrap standard errors for Monte Carlo estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_se: Option<Vec<f64>>,
}

impl MixingCurve {
    /// Smallest listed time whose TV is at most `eps`.
    pub fn t_mix(&self, eps: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.tv)
            .find(|(_, tv)| tv.is_some_and(|v| v <= eps))
            .map(|(t, _)| *t)
    }

    /// Smallest listed time whose squared L² distance is at most `eps`.
    pub fn t_l2(&self, eps: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.l2sq)
            .find(|(_, l)| l.is_some_and(|v| v <= eps))
            .map(|(t, _)| *t)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,l2sq,tv,mode\n");
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for i in 0..self.times.len() {
            let t = self.times[i];
            let ts = if t.fract() == 0.0 && t.abs() < 1e15 {
                format!("{}", t as i64)
            } else {
                format!("{t:.16e}")
            };
            let _ = writeln!(out, "{ts},{},{},{}", fmt(self.l2sq[i]), fmt(self.tv[i]), self.mode.as_str());
        }
        out
    }
}

/// `‖P^t − U‖₂² = Σ_{h≠1} |λ_h|^{2t}` (discrete) or `Σ_{h≠1} e^{−2t(1−Re λ_h)}` (continuous).
///
/// `eigs` must be the full spectrum of a group of order `order`.
pub fn exact_l2_curve(
    eigs: &[EigenvalueRecord],
    order: &BigInt,
    times: &[f64],
    chain: ChainTime,
) -> Result<MixingCurve, MixingError> {
    if BigInt::from(eigs.len()) != *order {
        return Err(MixingError::IncompleteSpectrum {
            have: eigs.len(),
            need: order.to_string(),
        });
    }
    let terms: Vec<(f64, bool)> = eigs
        .iter()
        .filter(|e| !e.trivial)
        .map(|e| match chain {
            ChainTime::Discrete => (e.modulus() * e.modulus(), e.exact_zero),
            ChainTime::Continuous => (1.0 - e.re(), false),
        })
        .collect();
    let l2sq: Vec<Option<f64>> = times
        .par_iter()
        .map(|&t| {
            let k: Kahan = terms
                .iter()
                .map(|&(x, zero)| match chain {
                    ChainTime::Discrete if t == 0.0 => 1.0,
                    ChainTime::Discrete if zero => 0.0,
                    ChainTime::Discrete => x.powf(t),
                    ChainTime::Continuous => (-2.0 * t * x).exp(),
                })
                .collect();
            Some(k.value())
        })
        .collect();
    Ok(MixingCurve {
        mode: CurveMode::ExactSpectral,
        chain,
        times: times.to_vec(),
        tv: vec![None; times.len()],
        l2sq,
        tv_se: None,
    })
}

/// `0, 1, …, t_max` as floats.
pub fn integer_times(t_max: u64) -> Vec<f64> {
    (0..=t_max).map(|t| t as f64).collect()
}
