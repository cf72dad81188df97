//! Spectra of `K_n` and `K_{2,m}` by enumerating character orbits under the vertex symmetry.
//!
//! Each entry is a distinct orbit with its size; sizes sum to the group order.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::EigenvalueRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orbit {
    pub lambda: Complex64,
    pub size: u64,
    pub trivial: bool,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Uniform-`μ` spectrum of `K_n` with the sink last: characters are `z ∈ (ℤ/n)^{n−1}` with
/// `Σz ≡ 0`, and `λ` depends only on how many vertices carry each residue.
pub fn complete_graph_orbits(n: usize) -> Vec<Orbit> {
    let nf = n as f64;
    let units: Vec<Complex64> = (0..n).map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / nf)).collect();
    let mut out = Vec::new();
    let mut counts = vec![0u64; n];
    fn rec(
        r: usize,
        left: u64,
        counts: &mut Vec<u64>,
        units: &[Complex64],
        n: usize,
        out: &mut Vec<Orbit>,
    ) {
        if r == n - 1 {
            counts[r] = left;
            let weight: usize = counts.iter().enumerate().map(|(i, &c)| i * c as usize).sum();
            if weight % n == 0 {
                let mut size = 1u64;
                let mut placed = 0u64;
                for &c in counts.iter() {
                    placed += c;
                    size *= binomial(placed, c);
                }
                let lambda = (Complex64::new(1.0, 0.0)
                    + counts.iter().zip(units).map(|(&c, u)| u * c as f64).sum::<Complex64>())
                    / n as f64;
                out.push(Orbit {
                    lambda,
                    size,
                    trivial: counts[0] as usize == n - 1,
                });
            }
            return;
        }
        for c in 0..=left {
            counts[r] = c;
            rec(r + 1, left - c, counts, units, n, out);
        }
        counts[r] = 0;
    }
    rec(0, (n - 1) as u64, &mut counts, &units, n, &mut out);
    out
}

/// Uniform-`μ` spectrum of `K_{2,m}` with the sink at `u₁`.
///
/// With `x` the phase at `u₂`, each `vⱼ` carries `x/2` or `x/2 + 1/2`; if `k` carry the
/// latter then harmonicity at `u₂` forces `m x ≡ k (mod 2)`.
pub fn bipartite_two_orbits(m: usize) -> Vec<Orbit> {
    let n = (m + 2) as f64;
    let mut out = Vec::new();
    for k in 0..=m {
        for mx in (k % 2..m).step_by(2) {
            let x = mx as f64 / m as f64;
            let lambda = (Complex64::new(1.0, 0.0)
                + Complex64::from_polar(1.0, 2.0 * PI * x)
                + Complex64::from_polar(1.0, PI * x) * (m as f64 - 2.0 * k as f64))
                / n;
            out.push(Orbit {
                lambda,
                size: binomial(m as u64, k as u64),
                trivial: k == 0 && mx == 0,
            });
        }
    }
    out
}

/// One record per orbit, usable wherever only extremes of the spectrum matter.
pub fn orbit_records(orbits: &[Orbit]) -> Vec<EigenvalueRecord> {
    orbits
        .iter()
        .enumerate()
        .map(|(i, o)| EigenvalueRecord {
            lambda: o.lambda,
            index: i as u64,
            trivial: o.trivial,
            exact_zero: false,
        })
        .collect()
}
