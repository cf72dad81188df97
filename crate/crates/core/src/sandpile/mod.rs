//! Chip configurations, stabilization, the sandpile group and the chain step.

mod group;

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;

pub use group::{GroupError, GroupModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SandpileError {
    #[error("stabilization exceeded its budget of {0} firing events")]
    NonTermination(u64),
    #[error("chip count overflow")]
    Overflow,
    #[error("configuration is not stable")]
    Unstable,
    #[error("configuration has {got} slots, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bad vertex distribution: {0}")]
    BadDistribution(String),
}

/// Chip counts on the non-sink vertices, slot `i` being `graph.vertex_of_slot(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub chips: Vec<u64>,
}

impl Configuration {
    pub fn new(chips: Vec<u64>) -> Self {
        Configuration { chips }
    }

    pub fn total(&self) -> u128 {
        self.chips.iter().map(|&c| c as u128).sum()
    }
}

/// Order in which unstable vertices are toppled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiringPolicy {
    /// Work queue; each visit fires `⌊chips / deg⌋` times at once.
    Fifo,
    /// One toppling at a time at the fullest unstable vertex (lowest slot on ties).
    MaxChipsFirst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub stable: Configuration,
    /// Toppling count per slot.
    pub odometer: Vec<u64>,
}

/// Precomputed toppling data for one graph and sink.
#[derive(Debug, Clone)]
pub struct Sandpile {
    graph: Graph,
    deg: Vec<u64>,
    nbrs: Vec<Vec<usize>>,
    sink_edges: Vec<u64>,
    budget: u64,
}

impl Sandpile {
    pub fn new(graph: &Graph) -> Self {
        let slots = graph.n() - 1;
        let mut deg = Vec::with_capacity(slots);
        let mut nbrs = Vec::with_capacity(slots);
        let mut sink_edges = Vec::with_capacity(slots);
        for i in 0..slots {
            let v = graph.vertex_of_slot(i);
            deg.push(graph.degree(v) as u64);
            nbrs.push(graph.neighbors(v).iter().filter_map(|&w| graph.slot(w)).collect());
            sink_edges.push(u64::from(graph.is_adjacent(v, graph.sink())));
        }
        Sandpile {
            graph: graph.clone(),
            deg,
            nbrs,
            sink_edges,
            budget: 1 << 40,
        }
    }

    /// Caps the number of firing events per stabilization.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn slots(&self) -> usize {
        self.deg.len()
    }

    /// Degree of the vertex in slot `i`.
    pub fn degree(&self, i: usize) -> u64 {
        self.deg[i]
    }

    /// Number of edges from slot `i` to the sink (0 or 1).
    pub fn sink_edges(&self, i: usize) -> u64 {
        self.sink_edges[i]
    }

    fn check_len(&self, c: &Configuration) -> Result<(), SandpileError> {
        if c.chips.len() != self.slots() {
            return Err(SandpileError::LengthMismatch {
                expected: self.slots(),
                got: c.chips.len(),
            });
        }
        Ok(())
    }

    pub fn is_stable(&self, c: &Configuration) -> bool {
        c.chips.iter().zip(&self.deg).all(|(x, d)| x < d)
    }

    /// `η*`, one chip short of toppling everywhere.
    pub fn saturated(&self) -> Configuration {
        Configuration::new(self.deg.iter().map(|d| d - 1).collect())
    }

    /// `ι`, the empty configuration.
    pub fn empty(&self) -> Configuration {
        Configuration::new(vec![0; self.slots()])
    }

    pub fn stabilize(&self, c: &Configuration) -> Result<Stabilized, SandpileError> {
        self.stabilize_with(c, FiringPolicy::Fifo)
    }

    pub fn stabilize_with(
        &self,
        c: &Configuration,
        policy: FiringPolicy,
    ) -> Result<Stabilized, SandpileError> {
        self.check_len(c)?;
        let mut chips = c.chips.clone();
        let mut odometer = vec![0u64; self.slots()];
        match policy {
            FiringPolicy::Fifo => self.run_fifo(&mut chips, &mut odometer)?,
            FiringPolicy::MaxChipsFirst => self.run_max_first(&mut chips, &mut odometer)?,
        }
        Ok(Stabilized {
            stable: Configuration::new(chips),
            odometer,
        })
    }

    fn run_fifo(&self, chips: &mut [u64], odometer: &mut [u64]) -> Result<(), SandpileError> {
        let n = chips.len();
        let mut queued = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for v in 0..n {
            if chips[v] >= self.deg[v] {
                queued[v] = true;
                queue.push_back(v);
            }
        }
        let mut events = 0u64;
        while let Some(v) = queue.pop_front() {
            queued[v] = false;
            let k = chips[v] / self.deg[v];
            if k == 0 {
                continue;
            }
            events += 1;
            if events > self.budget {
                return Err(SandpileError::NonTermination(self.budget));
            }
            chips[v] -= k * self.deg[v];
            odometer[v] = odometer[v].checked_add(k).ok_or(SandpileError::Overflow)?;
            for &w in &self.nbrs[v] {
                chips[w] = chips[w].checked_add(k).ok_or(SandpileError::Overflow)?;
                if !queued[w] && chips[w] >= self.deg[w] {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(())
    }

    fn run_max_first(&self, chips: &mut [u64], odometer: &mut [u64]) -> Result<(), SandpileError> {
        let mut events = 0u64;
        loop {
            let mut pick: Option<usize> = None;
            for v in 0..chips.len() {
                if chips[v] >= self.deg[v] && pick.map_or(true, |p| chips[v] > chips[p]) {
                    pick = Some(v);
                }
            }
            let Some(v) = pick else {
                return Ok(());
            };
            events += 1;
            if events > self.budget {
                return Err(SandpileError::NonTermination(self.budget));
            }
            chips[v] -= self.deg[v];
            odometer[v] += 1;
            for &w in &self.nbrs[v] {
                chips[w] = chips[w].checked_add(1).ok_or(SandpileError::Overflow)?;
            }
        }
    }

    /// `(a + b)°`.
    pub fn oplus(&self, a: &Configuration, b: &Configuration) -> Result<Configuration, SandpileError> {
        self.check_len(a)?;
        self.check_len(b)?;
        let sum = a
            .chips
            .iter()
            .zip(&b.chips)
            .map(|(x, y)| x.checked_add(*y).ok_or(SandpileError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.stabilize(&Configuration::new(sum))?.stable)
    }

    /// Adds one chip at slot `i` and stabilizes.
    pub fn add_chip(&self, c: &Configuration, i: usize) -> Result<Configuration, SandpileError> {
        let mut chips = c.chips.clone();
        chips[i] = chips[i].checked_add(1).ok_or(SandpileError::Overflow)?;
        Ok(self.stabilize(&Configuration::new(chips))?.stable)
    }

    /// The identity of the sandpile group, `(2η* − (2η*)°)°`.
    pub fn identity(&self) -> Result<Configuration, SandpileError> {
        let double: Vec<u64> = self.saturated().chips.iter().map(|x| 2 * x).collect();
        let first = self.stabilize(&Configuration::new(double.clone()))?.stable;
        let diff = double.iter().zip(&first.chips).map(|(a, b)| a - b).collect();
        Ok(self.stabilize(&Configuration::new(diff))?.stable)
    }

    /// Dhar's burning test.
    pub fn is_recurrent(&self, c: &Configuration) -> Result<bool, SandpileError> {
        self.check_len(c)?;
        if !self.is_stable(c) {
            return Err(SandpileError::Unstable);
        }
        let burned: Vec<u64> = c.chips.iter().zip(&self.sink_edges).map(|(x, s)| x + s).collect();
        let res = self.stabilize(&Configuration::new(burned))?;
        Ok(res.stable == *c && res.odometer.iter().all(|&k| k == 1))
    }

    /// Every stable configuration, in lexicographic order of chips (slot 0 most significant).
    pub fn stable_configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        let n = self.slots();
        let mut cur = vec![0u64; n];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Configuration::new(cur.clone());
            let mut i = n;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.deg[i] {
                    break;
                }
                cur[i] = 0;
            }
            Some(out)
        })
    }

    /// Number of stable configurations, saturating.
    pub fn stable_count(&self) -> u128 {
        self.deg
            .iter()
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }

    /// One step of the chain: add a chip at a `mu`-random vertex (sink = hold) and stabilize.
    pub fn chain_step<R: Rng + ?Sized>(
        &self,
        c: &Configuration,
        rng: &mut R,
        mu: &VertexDistribution,
    ) -> Result<Configuration, SandpileError> {
        let v = mu.sample(rng);
        match self.graph.slot(v) {
            None => Ok(c.clone()),
            Some(i) => self.add_chip(c, i),
        }
    }
}

/// A probability vector over all vertices, driving where chips are added.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDistribution {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    /// Integer weights and their total when the distribution is rational with small denominator.
    integer: Option<(Vec<u64>, u64)>,
}

impl VertexDistribution {
    fn build(weights: Vec<f64>, integer: Option<(Vec<u64>, u64)>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        VertexDistribution {
            weights,
            cumulative,
            integer,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_integer_weights(vec![1; n]).expect("nonempty")
    }

    /// Uniform over non-sink vertices (the non-lazy chain).
    pub fn uniform_non_sink(n: usize, sink: usize) -> Self {
        let w = (0..n).map(|v| u64::from(v != sink)).collect();
        Self::from_integer_weights(w).expect("n >= 2")
    }

    pub fn point_mass(n: usize, v: usize) -> Self {
        let w = (0..n).map(|u| u64::from(u == v)).collect();
        Self::from_integer_weights(w).expect("valid vertex")
    }

    pub fn from_integer_weights(w: Vec<u64>) -> Result<Self, SandpileError> {
        let total: u64 = w.iter().sum();
        if total == 0 {
            return Err(SandpileError::BadDistribution("all weights zero".into()));
        }
        let weights = w.iter().map(|&x| x as f64 / total as f64).collect();
        Ok(Self::build(weights, Some((w, total))))
    }

    pub fn from_weights(w: Vec<f64>) -> Result<Self, SandpileError> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SandpileError::BadDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SandpileError::BadDistribution(format!("weights sum to {total}")));
        }
        Ok(Self::build(w, None))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integer_weights(&self) -> Option<(&[u64], u64)> {
        self.integer.as_ref().map(|(w, t)| (w.as_slice(), *t))
    }

    pub fn is_uniform(&self) -> bool {
        matches!(&self.integer, Some((w, _)) if w.iter().all(|&x| x == w[0]))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty");
        let x = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x);
        i.min(self.weights.len() - 1)
    }
}
