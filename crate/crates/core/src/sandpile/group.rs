use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{self, Matrix, SmithDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invariant factor {0} does not fit in 64 bits")]
    FactorTooLarge(BigInt),
}

/// `ℤ^{n−1}/Δℤ^{n−1}` in Smith coordinates `z ↦ (u·z mod dᵢ)` over the nontrivial factors.
#[derive(Debug, Clone)]
pub struct GroupModel {
    graph: Graph,
    snf: SmithDecomposition,
    order: BigInt,
    moduli: Vec<u64>,
    /// Rows of `u` for the nontrivial factors, reduced mod `dᵢ`.
    rows: Vec<Vec<u64>>,
    /// Position of each nontrivial factor on the Smith diagonal.
    positions: Vec<usize>,
    generators: Vec<Vec<u64>>,
}

impl GroupModel {
    pub fn new(graph: &Graph) -> Result<Self, GroupError> {
        let reduced = graph.reduced_laplacian().to_big();
        let snf = linalg::smith_normal_form(&reduced);
        let order: BigInt = snf.diagonal.iter().product();
        let mut moduli = Vec::new();
        let mut rows = Vec::new();
        let mut positions = Vec::new();
        for (i, d) in snf.diagonal.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let dm = d.to_u64().ok_or_else(|| GroupError::FactorTooLarge(d.clone()))?;
            let row = snf
                .u
                .row(i)
                .iter()
                .map(|x| {
                    let r = x % d;
                    let r = if r < BigInt::from(0) { r + d } else { r };
                    r.to_u64().expect("reduced below a 64-bit modulus")
                })
                .collect();
            moduli.push(dm);
            rows.push(row);
            positions.push(i);
        }
        let mut model = GroupModel {
            graph: graph.clone(),
            snf,
            order,
            moduli,
            rows,
            positions,
            generators: Vec::new(),
        };
        model.generators = (0..graph.n() - 1)
            .map(|j| {
                let mut e = vec![0i64; graph.n() - 1];
                e[j] = 1;
                model.coords(&e)
            })
            .collect();
        Ok(model)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn snf(&self) -> &SmithDecomposition {
        &self.snf
    }

    /// `|𝒢|`.
    pub fn order(&self) -> &BigInt {
        &self.order
    }

    /// `|𝒢|` if it fits in 64 bits.
    pub fn size(&self) -> Option<u64> {
        self.order.to_u64()
    }

    /// Full Smith diagonal of the reduced Laplacian, trivial factors included.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.snf.diagonal
    }

    /// Nontrivial invariant factors, the radices of the coordinates.
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Largest invariant factor, the exponent of the group.
    pub fn exponent(&self) -> u64 {
        self.moduli.last().copied().unwrap_or(1)
    }

    /// Rows of `u` for the nontrivial factors, reduced mod `dᵢ`.
    pub fn coordinate_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_trivial(&self) -> bool {
        self.moduli.is_empty()
    }

    /// Coordinates of the coset of an integer vector on the non-sink slots.
    pub fn coords(&self, z: &[i64]) -> Vec<u64> {
        assert_eq!(z.len(), self.graph.n() - 1);
        self.rows
            .iter()
            .zip(&self.moduli)
            .map(|(row, &d)| {
                let d = d as i128;
                let mut acc: i128 = 0;
                for (&u, &x) in row.iter().zip(z) {
                    acc = (acc + (u as i128) * (x as i128).rem_euclid(d)) % d;
                }
                acc as u64
            })
            .collect()
    }

    pub fn coords_of_chips(&self, chips: &[u64]) -> Vec<u64> {
        let z: Vec<i64> = chips.iter().map(|&c| c as i64).collect();
        self.coords(&z)
    }

    /// Coordinates of the generator `σ_v` for each non-sink slot.
    pub fn generator_coords(&self) -> &[Vec<u64>] {
        &self.generators
    }

    /// Coordinates of the chip added at vertex `v`; the sink gives 0.
    pub fn vertex_coords(&self, v: usize) -> Vec<u64> {
        match self.graph.slot(v) {
            Some(i) => self.generators[i].clone(),
            None => vec![0; self.moduli.len()],
        }
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((x, y), d)| ((*x as u128 + *y as u128) % *d as u128) as u64)
            .collect()
    }

    /// Mixed-radix index; the first coordinate is the least significant digit.
    pub fn index(&self, coords: &[u64]) -> u64 {
        coords
            .iter()
            .zip(&self.moduli)
            .rev()
            .fold(0u64, |acc, (c, d)| acc * d + c)
    }

    pub fn decode(&self, mut index: u64) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|d| {
                let c = index % d;
                index /= d;
                c
            })
            .collect()
    }

    /// An integer vector whose coset has the given coordinates.
    pub fn representative(&self, coords: &[u64]) -> Vec<BigInt> {
        let k = self.snf.diagonal.len();
        let mut c = vec![BigInt::from(0); k];
        for (pos, &x) in self.positions.iter().zip(coords) {
            c[*pos] = BigInt::from(x);
        }
        let uinv = linalg::rational_inverse_of(&self.snf.u.to_rational()).expect("unimodular");
        let uinv = Matrix::from_fn(k, k, |i, j| uinv[(i, j)].to_integer());
        uinv.mul_vec(&c)
    }
}
