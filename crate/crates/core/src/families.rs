//! Named graph families and the `name:params[:sink=label]` spec grammar.
//!
//! Vertex numbering (0-based) per family; the sink is the last vertex unless overridden:
//!
//! * `cycle:n` — `0..n` in circular order.
//! * `complete:n`, `path:k` — `0..n`; the path runs in index order.
//! * `bipartite:m,n` — `u1..um` then `v1..vn`. `star:k` is `bipartite:1,k`.
//! * `torus:m` — vertex `i·m + j` for grid cell `(i, j)`, wrapping in both directions.
//! * `tail:m` (alias `triangle_with_tail`) — `u, v, w, w1..wm`.
//! * `sierpinski:m` — gasket points `(a, b)` of the triangular lattice with side `2^m`, ordered
//!   by `(b, a)`, so the top corner is last. Labels are `a_b`.
//! * `petersen` — outer cycle `0..5`, inner pentagram `5..10`.
//! * `rooted:BASE/P1/.../Pk` — parts concatenated in order; the root of each part is its sink
//!   and is identified with base vertex `j`. The sink is the root of the last part.
//! * `regular:n,d,seed` — pairing model; `er:n,p,seed` — Erdős–Rényi conditioned on connectivity.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphError};

pub const MAX_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Cycle(usize),
    Complete(usize),
    Path(usize),
    Bipartite(usize, usize),
    Torus(usize),
    TriangleWithTail(usize),
    Sierpinski(u32),
    Petersen,
    RootedSum { base: Box<Family>, parts: Vec<Family> },
    RandomRegular { n: usize, d: usize, seed: u64 },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

/// A family plus an optional sink label.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub sink: Option<String>,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cycle(n) => write!(f, "cycle:{n}"),
            Family::Complete(n) => write!(f, "complete:{n}"),
            Family::Path(k) => write!(f, "path:{k}"),
            Family::Bipartite(m, n) => write!(f, "bipartite:{m},{n}"),
            Family::Torus(m) => write!(f, "torus:{m}"),
            Family::TriangleWithTail(m) => write!(f, "tail:{m}"),
            Family::Sierpinski(m) => write!(f, "sierpinski:{m}"),
            Family::Petersen => write!(f, "petersen"),
            Family::RootedSum { base, parts } => {
                write!(f, "rooted:{base}")?;
                for p in parts {
                    write!(f, "/{p}")?;
                }
                Ok(())
            }
            Family::RandomRegular { n, d, seed } => write!(f, "regular:{n},{d},{seed}"),
            Family::ErdosRenyi { n, p, seed } => write!(f, "er:{n},{p},{seed}"),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(s) = &self.sink {
            write!(f, ":sink={s}")?;
        }
        Ok(())
    }
}

fn bad(msg: impl Into<String>) -> GraphError {
    GraphError::BadParameter(msg.into())
}

fn nums<T: std::str::FromStr>(params: &str, count: usize, name: &str) -> Result<Vec<T>, GraphError> {
    let parts: Vec<&str> = if params.is_empty() {
        Vec::new()
    } else {
        params.split(',').collect()
    };
    if parts.len() != count {
        return Err(bad(format!("{name} takes {count} parameter(s), got {params:?}")));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| bad(format!("{name}: cannot parse {p:?}")))
        })
        .collect()
}

impl Family {
    pub fn parse(text: &str) -> Result<Family, GraphError> {
        let (name, params) = text.split_once(':').unwrap_or((text, ""));
        let fam = match name {
            "cycle" => Family::Cycle(nums(params, 1, name)?[0]),
            "complete" => Family::Complete(nums(params, 1, name)?[0]),
            "path" => Family::Path(nums(params, 1, name)?[0]),
            "bipartite" => {
                let v: Vec<usize> = nums(params, 2, name)?;
                Family::Bipartite(v[0], v[1])
            }
            "star" => Family::Bipartite(1, nums(params, 1, name)?[0]),
            "torus" => Family::Torus(nums(params, 1, name)?[0]),
            "tail" | "triangle_with_tail" => Family::TriangleWithTail(nums(params, 1, name)?[0]),
            "sierpinski" => Family::Sierpinski(nums(params, 1, name)?[0]),
            "petersen" => {
                if !params.is_empty() {
                    return Err(bad("petersen takes no parameters"));
                }
                Family::Petersen
            }
            "rooted" => {
                let mut pieces = params.split('/');
                let base = Family::parse(pieces.next().unwrap_or(""))?;
                let parts = pieces.map(Family::parse).collect::<Result<Vec<_>, _>>()?;
                Family::RootedSum {
                    base: Box::new(base),
                    parts,
                }
            }
            "regular" => {
                let v: Vec<u64> = nums(params, 3, name)?;
                Family::RandomRegular {
                    n: v[0] as usize,
                    d: v[1] as usize,
                    seed: v[2],
                }
            }
            "er" | "erdos_renyi" => {
                let v: Vec<&str> = params.split(',').collect();
                if v.len() != 3 {
                    return Err(bad("er takes n,p,seed"));
                }
                let n = v[0].parse().map_err(|_| bad("er: bad n"))?;
                let p = v[1].parse().map_err(|_| bad("er: bad p"))?;
                let seed = v[2].parse().map_err(|_| bad("er: bad seed"))?;
                Family::ErdosRenyi { n, p, seed }
            }
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        Ok(fam)
    }

    pub fn build(&self) -> Result<Graph, GraphError> {
        match *self {
            Family::Cycle(n) => cycle(n),
            Family::Complete(n) => complete(n),
            Family::Path(k) => path(k),
            Family::Bipartite(m, n) => complete_bipartite(m, n),
            Family::Torus(m) => torus(m),
            Family::TriangleWithTail(m) => triangle_with_tail(m),
            Family::Sierpinski(m) => sierpinski(m),
            Family::Petersen => petersen(),
            Family::RootedSum {
                ref base,
                ref parts,
            } => {
                let base = base.build()?;
                let parts = parts.iter().map(Family::build).collect::<Result<Vec<_>, _>>()?;
                rooted_sum(&base, &parts)
            }
            Family::RandomRegular { n, d, seed } => random_regular(n, d, seed),
            Family::ErdosRenyi { n, p, seed } => erdos_renyi(n, p, seed),
        }
    }
}

impl FamilySpec {
    pub fn parse(text: &str) -> Result<FamilySpec, GraphError> {
        let text = text.trim();
        match text.rfind(":sink=") {
            Some(pos) => Ok(FamilySpec {
                family: Family::parse(&text[..pos])?,
                sink: Some(text[pos + 6..].to_string()),
            }),
            None => Ok(FamilySpec {
                family: Family::parse(text)?,
                sink: None,
            }),
        }
    }

    pub fn build(&self) -> Result<Graph, GraphError> {
        let g = self.family.build()?;
        match &self.sink {
            Some(label) => {
                let s = g.vertex_by_label(label)?;
                g.with_sink(s)
            }
            None => Ok(g),
        }
    }
}

/// Parses and builds a spec string in one go.
pub fn from_spec(text: &str) -> Result<Graph, GraphError> {
    FamilySpec::parse(text)?.build()
}

pub fn cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(bad("cycle needs n >= 3"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges, n - 1)
}

pub fn complete(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(bad("complete graph needs n >= 2"));
    }
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    Graph::new(n, &edges, n - 1)
}

pub fn path(k: usize) -> Result<Graph, GraphError> {
    if k < 2 {
        return Err(bad("path needs k >= 2"));
    }
    let edges: Vec<_> = (0..k - 1).map(|i| (i, i + 1)).collect();
    Graph::new(k, &edges, k - 1)
}

pub fn complete_bipartite(m: usize, n: usize) -> Result<Graph, GraphError> {
    if m < 1 || n < 1 {
        return Err(bad("bipartite parts must be nonempty"));
    }
    let edges: Vec<_> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, m + j)))
        .collect();
    let labels = (1..=m)
        .map(|i| format!("u{i}"))
        .chain((1..=n).map(|j| format!("v{j}")))
        .collect();
    Ok(Graph::new(m + n, &edges, m + n - 1)?.with_labels(labels))
}

pub fn torus(m: usize) -> Result<Graph, GraphError> {
    if m < 3 {
        return Err(bad("torus needs m >= 3"));
    }
    let idx = |i: usize, j: usize| (i % m) * m + (j % m);
    let mut edges = Vec::with_capacity(2 * m * m);
    for i in 0..m {
        for j in 0..m {
            edges.push((idx(i, j), idx(i + 1, j)));
            edges.push((idx(i, j), idx(i, j + 1)));
        }
    }
    Graph::new(m * m, &edges, m * m - 1)
}

pub fn triangle_with_tail(m: usize) -> Result<Graph, GraphError> {
    if m < 1 {
        return Err(bad("tail length must be >= 1"));
    }
    let n = m + 3;
    let mut edges = vec![(0, 1), (0, 2), (1, 2), (2, 3)];
    for i in 3..n - 1 {
        edges.push((i, i + 1));
    }
    let labels = ["u", "v", "w"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=m).map(|i| format!("w{i}")))
        .collect();
    Ok(Graph::new(n, &edges, n - 1)?.with_labels(labels))
}

fn sierpinski_points(m: u32) -> (Vec<(u64, u64)>, Vec<((u64, u64), (u64, u64))>) {
    let mut cells = vec![(0u64, 0u64)];
    for level in 0..m {
        let shift = 1u64 << level;
        let mut next = cells.clone();
        next.extend(cells.iter().map(|&(a, b)| (a + shift, b)));
        next.extend(cells.iter().map(|&(a, b)| (a, b + shift)));
        cells = next;
    }
    let mut points = BTreeSet::new();
    let mut edges = Vec::with_capacity(3 * cells.len());
    for &(a, b) in &cells {
        let (p, q, r) = ((a, b), (a + 1, b), (a, b + 1));
        points.extend([p, q, r]);
        edges.extend([(p, q), (q, r), (p, r)]);
    }
    let mut pts: Vec<_> = points.into_iter().collect();
    pts.sort_by_key(|&(a, b)| (b, a));
    (pts, edges)
}

pub fn sierpinski(m: u32) -> Result<Graph, GraphError> {
    if m > 8 {
        return Err(bad("sierpinski level capped at 8"));
    }
    let (pts, raw) = sierpinski_points(m);
    let index = |p: (u64, u64)| pts.binary_search_by_key(&(p.1, p.0), |&(a, b)| (b, a)).unwrap();
    let edges: Vec<_> = raw.iter().map(|&(p, q)| (index(p), index(q))).collect();
    let n = pts.len();
    let labels = pts.iter().map(|&(a, b)| format!("{a}_{b}")).collect();
    Ok(Graph::new(n, &edges, n - 1)?.with_labels(labels))
}

/// The three inner vertices of the copy of the level-1 gasket in the lower right corner.
pub fn sierpinski_inner_gadget(g: &Graph, m: u32) -> Result<[usize; 3], GraphError> {
    if m < 1 {
        return Err(bad("level-0 gasket has no inner gadget"));
    }
    let side = 1u64 << m;
    let (a, b) = (side - 2, 0u64);
    let find = |x: u64, y: u64| g.vertex_by_label(&format!("{x}_{y}"));
    Ok([find(a + 1, b)?, find(a, b + 1)?, find(a + 1, b + 1)?])
}

pub fn petersen() -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::new(10, &edges, 9)
}

/// Identifies the sink of `parts[j]` with base vertex `j`.
pub fn rooted_sum(base: &Graph, parts: &[Graph]) -> Result<Graph, GraphError> {
    if parts.len() != base.n() {
        return Err(bad(format!(
            "rooted sum needs one part per base vertex ({} != {})",
            parts.len(),
            base.n()
        )));
    }
    let mut offsets = Vec::with_capacity(parts.len());
    let mut total = 0;
    for p in parts {
        offsets.push(total);
        total += p.n();
    }
    let root = |j: usize| offsets[j] + parts[j].sink();
    let mut edges = Vec::new();
    let mut labels = Vec::with_capacity(total);
    for (j, p) in parts.iter().enumerate() {
        edges.extend(p.edges().iter().map(|&(a, b)| (a + offsets[j], b + offsets[j])));
        labels.extend(p.labels().iter().map(|l| format!("p{}_{l}", j + 1)));
    }
    edges.extend(base.edges().iter().map(|&(a, b)| (root(a), root(b))));
    Ok(Graph::new(total, &edges, root(parts.len() - 1))?.with_labels(labels))
}

/// Vertex ranges of each part inside a rooted sum built by [`rooted_sum`].
pub fn rooted_sum_ranges(parts: &[Graph]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    parts
        .iter()
        .map(|p| {
            let r = start..start + p.n();
            start += p.n();
            r
        })
        .collect()
}

pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if d == 0 || d >= n || (n * d) % 2 != 0 {
        return Err(bad("regular needs 0 < d < n and n·d even"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    for _ in 0..MAX_RETRIES {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let simple = stubs.chunks(2).all(|pair| {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            a != b && seen.insert((a, b))
        });
        if !simple {
            continue;
        }
        let edges: Vec<_> = seen.into_iter().collect();
        match Graph::new(n, &edges, n - 1) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::RandomFamilyExhausted(MAX_RETRIES))
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 2 || !(p > 0.0 && p <= 1.0) {
        return Err(bad("er needs n >= 2 and 0 < p <= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        match Graph::new(n, &edges, n - 1) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::RandomFamilyExhausted(MAX_RETRIES))
}
