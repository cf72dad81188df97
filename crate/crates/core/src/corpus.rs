//! The built-in test corpus: named families up to 8 vertices and seeded random graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::families;
use crate::graph::{Graph, GraphError};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_RANDOM_GRAPHS: usize = 50;
pub const RANDOM_EDGE_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: Graph,
}

/// Spec strings of the named part of the corpus.
pub fn named_specs() -> Vec<String> {
    let mut specs = Vec::new();
    for n in 3..=8 {
        specs.push(format!("cycle:{n}"));
    }
    for n in 2..=8 {
        specs.push(format!("complete:{n}"));
    }
    for k in 2..=8 {
        specs.push(format!("path:{k}"));
    }
    for k in 2..=7 {
        specs.push(format!("star:{k}"));
    }
    for m in 2..=4 {
        for n in m..=8 - m {
            specs.push(format!("bipartite:{m},{n}"));
        }
    }
    for m in 2..=6 {
        specs.push(format!("bipartite:2,{m}:sink=v1"));
    }
    for m in 1..=5 {
        specs.push(format!("tail:{m}"));
        specs.push(format!("tail:{m}:sink=u"));
    }
    specs.push("sierpinski:1".into());
    specs.push("rooted:path:2/cycle:3/cycle:4".into());
    specs.push("rooted:path:3/cycle:3/path:2/cycle:3".into());
    specs.push("rooted:cycle:3/cycle:3/path:2/path:2".into());
    specs
}

pub fn named() -> Result<Vec<CorpusEntry>, GraphError> {
    named_specs()
        .into_iter()
        .map(|s| {
            Ok(CorpusEntry {
                graph: families::from_spec(&s)?,
                name: s,
            })
        })
        .collect()
}

/// `count` connected Erdős–Rényi graphs with 4 to 8 vertices, reproducible from `seed`.
pub fn random(seed: u64, count: usize) -> Result<Vec<CorpusEntry>, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(4..=8);
            let s: u64 = rng.gen_range(0..1_000_000);
            let name = format!("er:{n},{RANDOM_EDGE_PROBABILITY},{s}");
            Ok(CorpusEntry {
                graph: families::erdos_renyi(n, RANDOM_EDGE_PROBABILITY, s)?,
                name,
            })
        })
        .collect()
}

/// Named graphs followed by the random ones.
pub fn full(seed: u64, count: usize) -> Result<Vec<CorpusEntry>, GraphError> {
    let mut all = named()?;
    all.extend(random(seed, count)?);
    Ok(all)
}
