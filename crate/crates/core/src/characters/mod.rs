//! Multiplicative harmonic functions, the characters of the sandpile group.

pub mod cyclotomic;
mod gadget;
mod orbits;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::sandpile::{GroupModel, VertexDistribution};

pub use gadget::{find_gadgets, gadget_extend, GadgetError, GadgetFinding, GadgetResult};
pub use orbits::{bipartite_two_orbits, complete_graph_orbits, orbit_records, Orbit};

pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

const EXACT_ZERO_PROBE: f64 = 1e-9;
const CHUNK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("group order {order} exceeds the enumeration budget {budget}")]
    BudgetExceeded { order: String, budget: u64 },
    #[error("phase denominator too large for exact storage")]
    PhaseOverflow,
}

/// Phases `x_v = residues[v] / modulus`, so `h(v) = e^{2πi x_v}`.
///
/// Stored in lowest terms: `modulus` is the order of the character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HarmonicFunction {
    sink: usize,
    modulus: u64,
    residues: Vec<u64>,
}

impl HarmonicFunction {
    pub fn new(sink: usize, modulus: u64, mut residues: Vec<u64>) -> Self {
        assert!(modulus > 0);
        let mut g = modulus;
        for r in residues.iter_mut() {
            *r %= modulus;
            g = g.gcd(&*r);
        }
        let g = g.max(1);
        HarmonicFunction {
            sink,
            modulus: modulus / g,
            residues: residues.into_iter().map(|r| r / g).collect(),
        }
    }

    /// From arbitrary rational phases; they are reduced mod 1.
    pub fn from_phases(sink: usize, phases: &[Ratio<i64>]) -> Result<Self, CharacterError> {
        let mut m: u64 = 1;
        for p in phases {
            let d = p.denom().unsigned_abs();
            m = m.lcm(&d);
            if m > 1 << 62 {
                return Err(CharacterError::PhaseOverflow);
            }
        }
        let residues = phases
            .iter()
            .map(|p| {
                let scale = (m / p.denom().unsigned_abs()) as i128;
                let num = (*p.numer() as i128) * scale * (p.denom().signum() as i128);
                num.rem_euclid(m as i128) as u64
            })
            .collect();
        Ok(HarmonicFunction::new(sink, m, residues))
    }

    pub fn trivial(n: usize, sink: usize) -> Self {
        HarmonicFunction::new(sink, 1, vec![0; n])
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn n(&self) -> usize {
        self.residues.len()
    }

    pub fn phase(&self, v: usize) -> Ratio<i64> {
        Ratio::new(self.residues[v] as i64, self.modulus as i64)
    }

    pub fn phases(&self) -> Vec<Ratio<i64>> {
        (0..self.n()).map(|v| self.phase(v)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.modulus == 1
    }

    pub fn value(&self, v: usize) -> Complex64 {
        unit(self.residues[v], self.modulus)
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n());
        let m = self.modulus.lcm(&other.modulus);
        let (a, b) = (m / self.modulus, m / other.modulus);
        let residues = self
            .residues
            .iter()
            .zip(&other.residues)
            .map(|(x, y)| ((*x as u128 * a as u128 + *y as u128 * b as u128) % m as u128) as u64)
            .collect();
        HarmonicFunction::new(self.sink, m, residues)
    }

    /// `v ↦ h(w)⁻¹ h(v)`, normalized for the new sink `w`.
    pub fn sink_change(&self, new_sink: usize) -> Self {
        let m = self.modulus;
        let base = self.residues[new_sink];
        let residues = self.residues.iter().map(|&r| (r + m - base) % m).collect();
        HarmonicFunction::new(new_sink, m, residues)
    }

    /// Value of the character on a chip configuration, `Π h(v)^{η(v)}`.
    pub fn evaluate_chips(&self, graph: &Graph, chips: &[u64]) -> Complex64 {
        let m = self.modulus as u128;
        let mut acc: u128 = 0;
        for (i, &c) in chips.iter().enumerate() {
            let v = graph.vertex_of_slot(i);
            acc = (acc + self.residues[v] as u128 * (c as u128 % m)) % m;
        }
        unit(acc as u64, self.modulus)
    }
}

/// `e^{2πi r/m}`.
pub fn unit(r: u64, m: u64) -> Complex64 {
    let r = r % m;
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (std::f64::consts::TAU * (r as f64 / m as f64)).sin_cos();
    Complex64::new(c, s)
}

/// Per-vertex failures of the geometric mean value property `deg(v)x_v − Σ_{w∼v} x_w ∈ ℤ`.
pub fn harmonic_defects(graph: &Graph, h: &HarmonicFunction) -> Vec<usize> {
    let m = h.modulus as i128;
    let r = &h.residues;
    let failing: Vec<usize> = (0..graph.n())
        .filter(|&v| {
            let mut acc = graph.degree(v) as i128 * r[v] as i128;
            for &w in graph.neighbors(v) {
                acc -= r[w] as i128;
            }
            acc.rem_euclid(m) != 0
        })
        .collect();
    // Σ_v (Δ̄x)_v = 0, so a single failing vertex is impossible.
    debug_assert_ne!(failing.len(), 1);
    failing
}

/// Exact check that `h` is multiplicative harmonic with `h(sink) = 1`.
pub fn verify_harmonic(graph: &Graph, h: &HarmonicFunction) -> bool {
    h.n() == graph.n() && h.residues[h.sink] == 0 && harmonic_defects(graph, h).is_empty()
}

/// Eigenvalue attached to one character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueRecord {
    pub lambda: Complex64,
    /// Enumeration index of the source character.
    pub index: u64,
    pub trivial: bool,
    /// Set when `λ = 0` was certified exactly.
    pub exact_zero: bool,
}

impl EigenvalueRecord {
    pub fn modulus(&self) -> f64 {
        if self.exact_zero {
            0.0
        } else {
            self.lambda.norm()
        }
    }

    pub fn re(&self) -> f64 {
        if self.exact_zero {
            0.0
        } else {
            self.lambda.re
        }
    }
}

fn eigen_from_residues(
    residues: &[u64],
    modulus: u64,
    mu: &VertexDistribution,
    table: Option<&[Complex64]>,
) -> (Complex64, bool) {
    let mut lambda = Complex64::new(0.0, 0.0);
    for (v, &r) in residues.iter().enumerate() {
        let w = mu.weight(v);
        if w == 0.0 {
            continue;
        }
        let z = match table {
            Some(t) => t[r as usize],
            None => unit(r, modulus),
        };
        lambda += z * w;
    }
    let mut exact_zero = false;
    if lambda.norm() < EXACT_ZERO_PROBE {
        if let Some((w, _)) = mu.integer_weights() {
            let g = residues.iter().fold(modulus, |g, r| g.gcd(r)).max(1);
            let reduced: Vec<u64> = residues.iter().map(|r| r / g).collect();
            if cyclotomic::vanishes(w, &reduced, modulus / g) == Some(true) {
                exact_zero = true;
                lambda = Complex64::new(0.0, 0.0);
            }
        }
    }
    (lambda, exact_zero)
}

/// `λ_h = Σ_v μ(v) h(v)`.
pub fn eigenvalue(h: &HarmonicFunction, mu: &VertexDistribution) -> EigenvalueRecord {
    let (lambda, exact_zero) = eigen_from_residues(&h.residues, h.modulus, mu, None);
    EigenvalueRecord {
        lambda,
        index: 0,
        trivial: h.is_trivial(),
        exact_zero,
    }
}

/// Characters of a group model, indexed by the mixed-radix odometer over `k`.
///
/// Character `k` has phases `x = uᵀw` with `wᵢ = kᵢ/dᵢ`, `k₁` the fastest digit.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    n: usize,
    sink: usize,
    exponent: u64,
    moduli: Vec<u64>,
    /// For each factor `i`, residues mod the exponent of `uᵢ·(E/dᵢ)` on every vertex.
    steps: Vec<Vec<u64>>,
    size: u64,
}

impl CharacterTable {
    pub fn new(model: &GroupModel, budget: u64) -> Result<Self, CharacterError> {
        let size = match model.size() {
            Some(s) if s <= budget => s,
            _ => {
                return Err(CharacterError::BudgetExceeded {
                    order: model.order().to_string(),
                    budget,
                })
            }
        };
        let g = model.graph();
        let e = model.exponent();
        let steps = model
            .coordinate_rows()
            .iter()
            .zip(model.moduli())
            .map(|(row, &d)| {
                let scale = e / d;
                let mut full = vec![0u64; g.n()];
                for (j, &u) in row.iter().enumerate() {
                    full[g.vertex_of_slot(j)] = ((u as u128 * scale as u128) % e as u128) as u64;
                }
                full
            })
            .collect();
        Ok(CharacterTable {
            n: g.n(),
            sink: g.sink(),
            exponent: e,
            moduli: model.moduli().to_vec(),
            steps,
            size,
        })
    }

    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn digits(&self, mut index: u64) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|d| {
                let c = index % d;
                index /= d;
                c
            })
            .collect()
    }

    /// Raw residues mod the exponent for character `index`.
    pub fn residues_at(&self, index: u64) -> Vec<u64> {
        let e = self.exponent as u128;
        let mut out = vec![0u64; self.n];
        for (k, step) in self.digits(index).iter().zip(&self.steps) {
            for (o, s) in out.iter_mut().zip(step) {
                *o = ((*o as u128 + *k as u128 * *s as u128) % e) as u64;
            }
        }
        out
    }

    pub fn character(&self, index: u64) -> HarmonicFunction {
        HarmonicFunction::new(self.sink, self.exponent, self.residues_at(index))
    }

    /// Calls `f(index, residues)` for every index in the range, residues taken mod the exponent.
    pub fn for_range(&self, range: std::ops::Range<u64>, mut f: impl FnMut(u64, &[u64])) {
        if range.is_empty() {
            return;
        }
        let e = self.exponent;
        let mut digits = self.digits(range.start);
        let mut res = self.residues_at(range.start);
        for index in range {
            f(index, &res);
            // d steps of factor i vanish mod the exponent, so a wrap also adds one step.
            for (i, d) in self.moduli.iter().enumerate() {
                for (r, s) in res.iter_mut().zip(&self.steps[i]) {
                    *r += s;
                    if *r >= e {
                        *r -= e;
                    }
                }
                digits[i] += 1;
                if digits[i] < *d {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    /// Streams every character in index order.
    pub fn iter(&self) -> impl Iterator<Item = HarmonicFunction> + '_ {
        (0..self.size).map(move |i| self.character(i))
    }

    /// Splits `0..len` into fixed blocks for deterministic parallel work.
    pub fn chunks(&self) -> Vec<std::ops::Range<u64>> {
        (0..self.size.div_ceil(CHUNK))
            .map(|c| c * CHUNK..((c + 1) * CHUNK).min(self.size))
            .collect()
    }

    /// Every eigenvalue, in character index order.
    pub fn spectrum(&self, mu: &VertexDistribution) -> Vec<EigenvalueRecord> {
        let e = self.exponent;
        let table: Option<Vec<Complex64>> = (e <= 1 << 20).then(|| (0..e).map(|r| unit(r, e)).collect());
        let table = table.as_deref();
        self.chunks()
            .into_par_iter()
            .map(|range| {
                let mut out = Vec::with_capacity((range.end - range.start) as usize);
                self.for_range(range, |index, res| {
                    let (lambda, exact_zero) = eigen_from_residues(res, e, mu, table);
                    out.push(EigenvalueRecord {
                        lambda,
                        index,
                        trivial: index == 0,
                        exact_zero,
                    });
                });
                out
            })
            .flatten()
            .collect()
    }
}

/// Streams all characters of the group, or fails if the order exceeds `budget`.
pub fn enumerate_characters(
    model: &GroupModel,
    budget: u64,
) -> Result<impl Iterator<Item = HarmonicFunction>, CharacterError> {
    let table = CharacterTable::new(model, budget)?;
    Ok((0..table.len()).map(move |i| table.character(i)))
}

/// I.i.d. uniform characters; works for any group order with 64-bit invariant factors.
pub fn sample_characters<R: Rng + ?Sized>(
    model: &GroupModel,
    count: usize,
    rng: &mut R,
) -> Vec<HarmonicFunction> {
    let g = model.graph();
    let e = model.exponent();
    (0..count)
        .map(|_| {
            let mut res = vec![0u64; g.n()];
            for (row, &d) in model.coordinate_rows().iter().zip(model.moduli()) {
                let k = rng.gen_range(0..d) as u128;
                let scale = (e / d) as u128;
                for (j, &u) in row.iter().enumerate() {
                    let v = g.vertex_of_slot(j);
                    res[v] = ((res[v] as u128 + k * u as u128 * scale) % e as u128) as u64;
                }
            }
            HarmonicFunction::new(g.sink(), e, res)
        })
        .collect()
}

/// Eigenvalues of sampled characters; the trivial flag is set by value.
pub fn sampled_spectrum(chars: &[HarmonicFunction], mu: &VertexDistribution) -> Vec<EigenvalueRecord> {
    chars
        .iter()
        .enumerate()
        .map(|(i, h)| EigenvalueRecord {
            index: i as u64,
            ..eigenvalue(h, mu)
        })
        .collect()
}
