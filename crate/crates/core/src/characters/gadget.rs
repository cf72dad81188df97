//! Gadgets: local harmonic patches that extend by 1 to a global character.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{eigenvalue, verify_harmonic, EigenvalueRecord, HarmonicFunction};
use crate::graph::Graph;
use crate::linalg::{smith_normal_form, Matrix};
use crate::sandpile::VertexDistribution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("not a gadget: every phase is trivial")]
    EmptyInterior,
    #[error("not a gadget: interior vertex {0} has a neighbor outside the subgraph")]
    InteriorTouchesOutside(usize),
    #[error("not a gadget: mean value property fails at vertex {0} of the subgraph")]
    MeanValueFails(usize),
    #[error("not a gadget: the sink {0} lies in the interior")]
    SinkInInterior(usize),
    #[error("gadget input malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone)]
pub struct GadgetResult {
    pub h: HarmonicFunction,
    /// Interior vertices, those with `h ≠ 1`.
    pub interior: Vec<usize>,
    /// `2m/n` with `m` the interior size.
    pub bound: f64,
    pub eigenvalue: EigenvalueRecord,
}

/// Extends phases on `vertices` by 0 to the whole host and checks the gadget conditions.
pub fn gadget_extend(
    host: &Graph,
    vertices: &[usize],
    phases: &[Ratio<i64>],
) -> Result<GadgetResult, GadgetError> {
    if vertices.len() != phases.len() {
        return Err(GadgetError::Malformed("one phase per vertex required".into()));
    }
    let n = host.n();
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    if set.len() != vertices.len() || vertices.iter().any(|&v| v >= n) {
        return Err(GadgetError::Malformed("vertices must be distinct and in range".into()));
    }
    let mut full = vec![Ratio::zero(); n];
    for (&v, p) in vertices.iter().zip(phases) {
        full[v] = *p;
    }
    let h = HarmonicFunction::from_phases(host.sink(), &full)
        .map_err(|e| GadgetError::Malformed(e.to_string()))?;
    let r = h.residues();
    let m = h.modulus() as i128;
    let interior: Vec<usize> = vertices.iter().copied().filter(|&v| r[v] != 0).collect();
    if interior.is_empty() {
        return Err(GadgetError::EmptyInterior);
    }
    for &v in &interior {
        if host.neighbors(v).iter().any(|w| !set.contains(w)) {
            return Err(GadgetError::InteriorTouchesOutside(v));
        }
    }
    for &v in vertices {
        let inside: Vec<usize> = host
            .neighbors(v)
            .iter()
            .copied()
            .filter(|w| set.contains(w))
            .collect();
        let mut acc = inside.len() as i128 * r[v] as i128;
        for w in inside {
            acc -= r[w] as i128;
        }
        if acc.rem_euclid(m) != 0 {
            return Err(GadgetError::MeanValueFails(v));
        }
    }
    if r[host.sink()] != 0 {
        return Err(GadgetError::SinkInInterior(host.sink()));
    }
    assert!(verify_harmonic(host, &h), "gadget extension must be harmonic");
    let eig = eigenvalue(&h, &VertexDistribution::uniform(n));
    Ok(GadgetResult {
        bound: 2.0 * interior.len() as f64 / n as f64,
        interior,
        h,
        eigenvalue: eig,
    })
}

/// A gadget interior found by [`find_gadgets`] with one witnessing phase vector.
#[derive(Debug, Clone)]
pub struct GadgetFinding {
    pub interior: Vec<usize>,
    /// Interior followed by its outside neighbors.
    pub vertices: Vec<usize>,
    pub phases: Vec<Ratio<i64>>,
}

const MAX_SOLUTIONS: u64 = 1_000_000;

/// Solves the interior constraints for `w`: phases on `w` with all entries nonzero mod 1,
/// zero on the outside neighbors, mean value property on `w ∪ N(w)`.
fn solve_interior(g: &Graph, w: &[usize]) -> Option<Vec<Ratio<i64>>> {
    let k = w.len();
    let pos = |v: usize| w.iter().position(|&x| x == v);
    let boundary: BTreeSet<usize> = w
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|v| pos(*v).is_none())
        .collect();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for &v in w {
        let mut row = vec![BigInt::zero(); k];
        row[pos(v).unwrap()] += g.degree(v) as i64;
        for &u in g.neighbors(v) {
            if let Some(j) = pos(u) {
                row[j] -= 1;
            }
        }
        rows.push(row);
    }
    for &b in &boundary {
        let mut row = vec![BigInt::zero(); k];
        for &u in g.neighbors(b) {
            if let Some(j) = pos(u) {
                row[j] -= 1;
            }
        }
        rows.push(row);
    }
    let snf = smith_normal_form(&Matrix::from_rows(rows));
    let d: Vec<u64> = snf.diagonal.iter().map(|x| x.to_u64().unwrap_or(0)).collect();
    if d.iter().any(|&x| x == 0) {
        return None;
    }
    let count = d.iter().try_fold(1u64, |acc, &x| acc.checked_mul(x))?;
    if count > MAX_SOLUTIONS {
        return None;
    }
    let lcm = d.iter().fold(1u64, |a, b| a.lcm(b)) as i128;
    let v: Vec<Vec<i128>> = (0..k)
        .map(|i| (0..k).map(|j| snf.v[(i, j)].to_i128().expect("small")).collect())
        .collect();
    let mut digits = vec![0u64; k];
    for _ in 0..count {
        // x = V y with y_i = digits_i / d_i, scaled by the lcm.
        let x: Vec<i128> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| v[i][j] * digits[j] as i128 * (lcm / d[j] as i128))
                    .sum::<i128>()
                    .rem_euclid(lcm)
            })
            .collect();
        if x.iter().all(|&xi| xi != 0) {
            return Some(x.iter().map(|&xi| Ratio::new(xi as i64, lcm as i64)).collect());
        }
        for (dig, &dm) in digits.iter_mut().zip(&d) {
            *dig += 1;
            if *dig < dm {
                break;
            }
            *dig = 0;
        }
    }
    None
}

fn subsets(n: usize, max: usize, mut f: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, max: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max {
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, max, cur, f);
            cur.pop();
        }
    }
    rec(0, n, max, &mut Vec::new(), &mut f);
}

/// Exhaustive search over vertex subsets of size `≤ max_size` (connected or not) that are
/// gadget interiors. The sink is ignored; move it with [`HarmonicFunction::sink_change`].
pub fn find_gadgets(g: &Graph, max_size: usize) -> Vec<GadgetFinding> {
    let mut found = Vec::new();
    subsets(g.n(), max_size.min(g.n() - 1), |w| {
        if let Some(phases) = solve_interior(g, w) {
            let mut vertices = w.to_vec();
            let outside: BTreeSet<usize> = w
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().copied())
                .filter(|v| !w.contains(v))
                .collect();
            vertices.extend(outside);
            let mut full = phases.clone();
            full.resize(vertices.len(), Ratio::zero());
            found.push(GadgetFinding {
                interior: w.to_vec(),
                vertices,
                phases: full,
            });
        }
    });
    found
}
