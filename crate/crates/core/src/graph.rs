//! Simple connected graphs with a designated sink.
//!
//! Vertices are 0-based inside the library. File and CLI formats are 1-based.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {0} out of range")]
    VertexOutOfRange(usize),
    #[error("sink {0} out of range")]
    SinkOutOfRange(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("random family gave up after {0} retries")]
    RandomFamilyExhausted(usize),
    #[error("malformed graph input: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    sink: usize,
    adj: Vec<Vec<usize>>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub min: usize,
    /// Second-largest entry of the sorted degree sequence.
    pub star: usize,
    pub max: usize,
}

#[derive(Debug, Clone)]
pub struct LaplacianBundle {
    pub full: Matrix<i64>,
    pub reduced: Matrix<i64>,
    pub degree_stats: DegreeStats,
    /// `None` for forests.
    pub girth: Option<usize>,
}

/// JSON input format: `{"n": 4, "edges": [[1,2],[2,3]], "sink": 4}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub sink: Option<usize>,
}

impl Graph {
    /// Builds a graph from 0-based edges.
    pub fn new(n: usize, edges: &[(usize, usize)], sink: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooSmall(n));
        }
        if sink >= n {
            return Err(GraphError::SinkOutOfRange(sink));
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n {
                return Err(GraphError::VertexOutOfRange(a));
            }
            if b >= n {
                return Err(GraphError::VertexOutOfRange(b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph {
            n,
            edges: seen.into_iter().collect(),
            sink,
            adj,
            labels: (1..=n).map(|i| i.to_string()).collect(),
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from 1-based edges and sink.
    pub fn from_one_based(
        n: usize,
        edges: &[(usize, usize)],
        sink: usize,
    ) -> Result<Self, GraphError> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == 0 || b == 0 {
                return Err(GraphError::VertexOutOfRange(0));
            }
            zero.push((a - 1, b - 1));
        }
        if sink == 0 {
            return Err(GraphError::SinkOutOfRange(0));
        }
        Graph::new(n, &zero, sink - 1)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_one_based(raw.n, &edges, raw.sink.unwrap_or(raw.n))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
            sink: Some(self.sink + 1),
        }
    }

    pub(crate) fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = labels;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Resolves a vertex by family label (e.g. `u1`) or 1-based number.
    pub fn vertex_by_label(&self, label: &str) -> Result<usize, GraphError> {
        if let Some(v) = self.labels.iter().position(|l| l == label) {
            return Ok(v);
        }
        match label.parse::<usize>() {
            Ok(k) if k >= 1 && k <= self.n => Ok(k - 1),
            _ => Err(GraphError::UnknownLabel(label.to_string())),
        }
    }

    pub fn with_sink(&self, sink: usize) -> Result<Self, GraphError> {
        if sink >= self.n {
            return Err(GraphError::SinkOutOfRange(sink));
        }
        let mut g = self.clone();
        g.sink = sink;
        Ok(g)
    }

    /// Non-sink vertices in increasing order; slot `i` of a configuration is vertex `non_sink()[i]`.
    pub fn non_sink(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| v != self.sink).collect()
    }

    /// Configuration slot of vertex `v`, or `None` for the sink.
    pub fn slot(&self, v: usize) -> Option<usize> {
        match v.cmp(&self.sink) {
            std::cmp::Ordering::Less => Some(v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(v - 1),
        }
    }

    pub fn vertex_of_slot(&self, i: usize) -> usize {
        if i < self.sink {
            i
        } else {
            i + 1
        }
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    pub fn full_laplacian(&self) -> Matrix<i64> {
        let mut m = Matrix::zeros(self.n, self.n);
        for v in 0..self.n {
            m[(v, v)] = self.degree(v) as i64;
            for &w in &self.adj[v] {
                m[(v, w)] = -1;
            }
        }
        m
    }

    pub fn reduced_laplacian(&self) -> Matrix<i64> {
        let keep = self.non_sink();
        let full = self.full_laplacian();
        Matrix::from_fn(keep.len(), keep.len(), |i, j| full[(keep[i], keep[j])])
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let mut d = self.degrees();
        d.sort_unstable();
        DegreeStats {
            min: d[0],
            star: d[d.len() - 2],
            max: d[d.len() - 1],
        }
    }

    /// Length of the shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        for root in 0..self.n {
            dist.fill(usize::MAX);
            parent.fill(usize::MAX);
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let len = dist[v] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    pub fn laplacians(&self) -> LaplacianBundle {
        LaplacianBundle {
            full: self.full_laplacian(),
            reduced: self.reduced_laplacian(),
            degree_stats: self.degree_stats(),
            girth: self.girth(),
        }
    }

    /// Number of spanning trees, read off the Smith form of the reduced Laplacian.
    pub fn spanning_tree_count(&self) -> BigInt {
        linalg::invariant_factors(&self.reduced_laplacian().to_big())
            .iter()
            .product()
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Graph::new(self.n, &edges, perm[self.sink])
    }
}
