use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{ChainTime, CurveMode, Kahan, MixingCurve, MixingError};
use crate::sandpile::{GroupModel, VertexDistribution};

pub const DEFAULT_EVOLUTION_BUDGET: u64 = 300_000;
const BLOCK: usize = 4096;

/// Distinct step shifts in group coordinates with their total weight.
fn step_measure(model: &GroupModel, mu: &VertexDistribution) -> Vec<(Vec<u64>, f64)> {
    let mut acc: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for v in 0..model.graph().n() {
        let w = mu.weight(v);
        if w > 0.0 {
            *acc.entry(model.vertex_coords(v)).or_insert(0.0) += w;
        }
    }
    acc.into_iter().collect()
}

/// A probability vector on the group, indexed by mixed-radix Smith coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDistribution {
    pub moduli: Vec<u64>,
    pub probs: Vec<f64>,
}

impl GroupDistribution {
    pub fn point_mass(moduli: &[u64], index: usize) -> Self {
        let size: u64 = moduli.iter().product();
        let mut probs = vec![0.0; size as usize];
        probs[index] = 1.0;
        GroupDistribution {
            moduli: moduli.to_vec(),
            probs,
        }
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().copied().collect::<Kahan>().value()
    }

    /// `½ Σ |p(x) − 1/N|`.
    pub fn tv(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        let parts: Vec<Kahan> = self
            .probs
            .par_chunks(BLOCK)
            .map(|c| c.iter().map(|p| (p - u).abs()).collect())
            .collect();
        let mut k = Kahan::default();
        for p in &parts {
            k.merge(p);
        }
        0.5 * k.value()
    }

    /// `N Σ (p(x) − 1/N)²`, the squared L² distance of the density from 1.
    pub fn l2sq(&self) -> f64 {
        let nf = self.probs.len() as f64;
        let u = 1.0 / nf;
        let parts: Vec<Kahan> = self
            .probs
            .par_chunks(BLOCK)
            .map(|c| c.iter().map(|p| (p - u) * (p - u)).collect())
            .collect();
        let mut k = Kahan::default();
        for p in &parts {
            k.merge(p);
        }
        nf * k.value()
    }
}

/// Dense exact evolution `p_{t+1}(y) = Σ_g μ(g) p_t(y − g)`.
pub struct Evolution {
    dist: GroupDistribution,
    /// For each shift, its weight and the table `y ↦ index(y − g)`.
    shifts: Vec<(f64, Vec<u32>)>,
    hold: f64,
    t: u64,
}

impl Evolution {
    pub fn new(model: &GroupModel, mu: &VertexDistribution, budget: u64) -> Result<Self, MixingError> {
        let size = match model.size() {
            Some(s) if s <= budget && s <= u32::MAX as u64 => s as usize,
            _ => {
                return Err(MixingError::BudgetExceeded {
                    order: model.order().to_string(),
                    budget,
                })
            }
        };
        let moduli = model.moduli().to_vec();
        let mut hold = 0.0;
        let mut shifts = Vec::new();
        for (g, w) in step_measure(model, mu) {
            if g.iter().all(|&x| x == 0) {
                hold += w;
                continue;
            }
            let neg: Vec<u64> = g.iter().zip(&moduli).map(|(x, d)| (d - x) % d).collect();
            let table: Vec<u32> = (0..size)
                .into_par_iter()
                .with_min_len(BLOCK)
                .map(|y| model.index(&model.add(&model.decode(y as u64), &neg)) as u32)
                .collect();
            shifts.push((w, table));
        }
        Ok(Evolution {
            dist: GroupDistribution::point_mass(&moduli, 0),
            shifts,
            hold,
            t: 0,
        })
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn distribution(&self) -> &GroupDistribution {
        &self.dist
    }

    pub fn step(&mut self) {
        let old = &self.dist.probs;
        let hold = self.hold;
        let shifts = &self.shifts;
        let new: Vec<f64> = (0..old.len())
            .into_par_iter()
            .with_min_len(BLOCK)
            .map(|y| {
                let mut acc = hold * old[y];
                for (w, table) in shifts {
                    acc += w * old[table[y] as usize];
                }
                acc
            })
            .collect();
        self.dist.probs = new;
        self.t += 1;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionCurve {
    pub curve: MixingCurve,
    /// Total mass after every step.
    pub mass: Vec<f64>,
}

/// TV and L² distance from uniform at `t = 0..=t_max`, starting from the identity.
pub fn exact_evolution(
    model: &GroupModel,
    t_max: u64,
    mu: &VertexDistribution,
    budget: u64,
) -> Result<EvolutionCurve, MixingError> {
    exact_evolution_at(model, &(0..=t_max).collect::<Vec<_>>(), mu, budget)
}

/// As [`exact_evolution`] but recording only the listed (ascending) times.
pub fn exact_evolution_at(
    model: &GroupModel,
    times: &[u64],
    mu: &VertexDistribution,
    budget: u64,
) -> Result<EvolutionCurve, MixingError> {
    let mut ev = Evolution::new(model, mu, budget)?;
    let mut tv = Vec::new();
    let mut l2 = Vec::new();
    let mut mass = Vec::new();
    for &t in times {
        while ev.time() < t {
            ev.step();
        }
        tv.push(Some(ev.dist.tv()));
        l2.push(Some(ev.dist.l2sq()));
        mass.push(ev.dist.mass());
    }
    Ok(EvolutionCurve {
        curve: MixingCurve {
            mode: CurveMode::ExactEvolution,
            chain: ChainTime::Discrete,
            times: times.iter().map(|&t| t as f64).collect(),
            l2sq: l2,
            tv,
            tv_se: None,
        },
        mass,
    })
}

/// Exact evolution that stores only the support, for large groups at small times.
pub fn sparse_evolution(
    model: &GroupModel,
    t_max: u64,
    mu: &VertexDistribution,
    max_support: usize,
) -> Result<EvolutionCurve, MixingError> {
    let n_states = model.size().ok_or_else(|| MixingError::BudgetExceeded {
        order: model.order().to_string(),
        budget: u64::MAX,
    })? as f64;
    let shifts = step_measure(model, mu);
    let u = 1.0 / n_states;
    let mut dist: BTreeMap<u64, f64> = BTreeMap::new();
    dist.insert(0, 1.0);
    let (mut tv, mut l2, mut mass) = (Vec::new(), Vec::new(), Vec::new());
    let mut record = |dist: &BTreeMap<u64, f64>| {
        let mut dev = Kahan::default();
        let mut sq = Kahan::default();
        let mut m = Kahan::default();
        for &p in dist.values() {
            dev.add((p - u).abs());
            sq.add((p - u) * (p - u));
            m.add(p);
        }
        let missing = n_states - dist.len() as f64;
        dev.add(missing * u);
        sq.add(missing * u * u);
        tv.push(Some(0.5 * dev.value()));
        l2.push(Some(n_states * sq.value()));
        mass.push(m.value());
    };
    record(&dist);
    for _ in 0..t_max {
        let mut next: BTreeMap<u64, f64> = BTreeMap::new();
        for (&x, &p) in &dist {
            let cx = model.decode(x);
            for (g, w) in &shifts {
                *next.entry(model.index(&model.add(&cx, g))).or_insert(0.0) += w * p;
            }
        }
        if next.len() > max_support {
            return Err(MixingError::BudgetExceeded {
                order: model.order().to_string(),
                budget: max_support as u64,
            });
        }
        dist = next;
        record(&dist);
    }
    Ok(EvolutionCurve {
        curve: MixingCurve {
            mode: CurveMode::ExactEvolution,
            chain: ChainTime::Discrete,
            times: (0..=t_max).map(|t| t as f64).collect(),
            l2sq: l2,
            tv,
            tv_se: None,
        },
        mass,
    })
}
