use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ChainTime, CurveMode, MixingCurve, MixingError};
use crate::sandpile::{GroupModel, Sandpile, VertexDistribution};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub curve: MixingCurve,
    pub trajectories: usize,
    /// Expected plug-in TV of `trajectories` uniform samples; estimates below it are noise.
    pub noise_floor: f64,
    /// Set when `|𝒢|` is comparable to or larger than the number of trajectories.
    pub bias_warning: Option<String>,
}

/// RNG for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn plug_in_tv(indices: impl Iterator<Item = u64>, total: usize, n_states: f64) -> f64 {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for i in indices {
        *counts.entry(i).or_insert(0) += 1;
    }
    let u = 1.0 / n_states;
    let mut keys: Vec<(&u64, &u64)> = counts.iter().collect();
    keys.sort_unstable();
    let seen: f64 = keys
        .iter()
        .map(|(_, &c)| (c as f64 / total as f64 - u).abs())
        .sum();
    0.5 * (seen + (n_states - counts.len() as f64) * u)
}

/// Expected plug-in TV when `samples` draws come from the uniform law on `n_states` cells.
pub fn uniform_noise_floor(samples: usize, n_states: f64) -> f64 {
    if n_states <= 1.0 {
        return 0.0;
    }
    if !n_states.is_finite() {
        return 1.0;
    }
    // E|X/T − p| for X ~ Bin(T, p), summed over the N cells.
    let t = samples as f64;
    let p = 1.0 / n_states;
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mean = t * p;
    let sd = (t * p * (1.0 - p)).sqrt();
    let hi = (mean + 40.0 * sd + 40.0).min(t) as u64;
    let mut lg = 0.0f64;
    let mut mad = 0.0;
    for k in 0..=hi {
        if k > 0 {
            lg += ((t - k as f64 + 1.0) / k as f64).ln();
        }
        let pmf = (lg + k as f64 * ln_p + (t - k as f64) * ln_q).exp();
        mad += pmf * (k as f64 / t - p).abs();
    }
    0.5 * n_states * mad
}

/// Plug-in TV estimates from independent trajectories started at the identity, with
/// bootstrap standard errors.
pub fn monte_carlo_tv(
    model: &GroupModel,
    mu: &VertexDistribution,
    trajectories: usize,
    t_grid: &[u64],
    seed: u64,
) -> Result<MonteCarloReport, MixingError> {
    let pile = Sandpile::new(model.graph());
    let start = pile.identity()?;
    let samples: Vec<Vec<u64>> = (0..trajectories as u64)
        .into_par_iter()
        .map(|j| -> Result<Vec<u64>, MixingError> {
            let mut rng = trajectory_rng(seed, j);
            let mut c = start.clone();
            let mut out = Vec::with_capacity(t_grid.len());
            let mut t = 0;
            for &target in t_grid {
                while t < target {
                    c = pile.chain_step(&c, &mut rng, mu)?;
                    t += 1;
                }
                out.push(model.index(&model.coords_of_chips(&c.chips)));
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let n_states = model.size().map_or(f64::INFINITY, |s| s as f64);
    let mut tv = Vec::new();
    let mut se = Vec::new();
    for (k, _) in t_grid.iter().enumerate() {
        let est = plug_in_tv(samples.iter().map(|s| s[k]), trajectories, n_states);
        let mut rng = trajectory_rng(seed ^ 0x9e37_79b9_7f4a_7c15, k as u64);
        let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let draw: Vec<u64> = (0..trajectories)
                    .map(|_| samples[rng.gen_range(0..trajectories)][k])
                    .collect();
                plug_in_tv(draw.into_iter(), trajectories, n_states)
            })
            .collect();
        let mean = boots.iter().sum::<f64>() / boots.len() as f64;
        let var = boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boots.len() - 1) as f64;
        tv.push(Some(est));
        se.push(var.sqrt());
    }
    let bias_warning = (n_states >= 0.1 * trajectories as f64).then(|| {
        format!(
            "group order {} is not small against {trajectories} trajectories; plug-in TV is biased upward",
            model.order()
        )
    });
    Ok(MonteCarloReport {
        curve: MixingCurve {
            mode: CurveMode::MonteCarlo,
            chain: ChainTime::Discrete,
            times: t_grid.iter().map(|&t| t as f64).collect(),
            l2sq: vec![None; t_grid.len()],
            tv,
            tv_se: Some(se),
        },
        trajectories,
        noise_floor: uniform_noise_floor(trajectories, n_states),
        bias_warning,
    })
}
