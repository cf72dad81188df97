//! Per-graph spectral profile shared by the report, the verifier and the CLI.

use crate::characters::{CharacterTable, EigenvalueRecord};
use crate::graph::Graph;
use crate::linalg::{random_walk_eigenvalues, symmetric_eigenvalues};
use crate::sandpile::{GroupModel, VertexDistribution};
use crate::spectral::{shortest_coset_vectors, spectral_summary, ShortestCosetVectors, SpectralSummary};
use crate::Error;

/// Group model plus the full uniform-`μ` spectrum when the order fits the budget.
#[derive(Debug, Clone)]
pub struct Profile {
    pub graph: Graph,
    pub model: GroupModel,
    pub table: CharacterTable,
    pub eigs: Vec<EigenvalueRecord>,
    /// `None` for trees.
    pub summary: Option<SpectralSummary>,
}

impl Profile {
    pub fn new(graph: &Graph, budget: u64) -> Result<Self, Error> {
        let model = GroupModel::new(graph)?;
        let table = CharacterTable::new(&model, budget)?;
        let eigs = table.spectrum(&VertexDistribution::uniform(graph.n()));
        let summary = if model.is_trivial() {
            None
        } else {
            Some(spectral_summary(&eigs, false)?)
        };
        Ok(Profile {
            graph: graph.clone(),
            model,
            table,
            eigs,
            summary,
        })
    }

    pub fn order(&self) -> u64 {
        self.table.len()
    }

    pub fn vectors(&self) -> Result<Option<ShortestCosetVectors>, Error> {
        if self.model.is_trivial() {
            return Ok(None);
        }
        Ok(Some(shortest_coset_vectors(&self.table)?))
    }

    /// Ascending eigenvalues of the full Laplacian.
    pub fn beta(&self) -> Result<Vec<f64>, Error> {
        Ok(symmetric_eigenvalues(&self.graph.full_laplacian().to_f64())?)
    }

    /// Ascending eigenvalues of the random-walk Laplacian.
    pub fn theta(&self) -> Result<Vec<f64>, Error> {
        Ok(random_walk_eigenvalues(&self.graph.full_laplacian())?)
    }
}
