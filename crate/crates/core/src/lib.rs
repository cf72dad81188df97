//! Spectral and mixing-time analysis of the abelian sandpile Markov chain.

pub mod analysis;
pub mod characters;
pub mod corpus;
pub mod families;
pub mod graph;
pub mod linalg;
pub mod mixing;
pub mod sandpile;
pub mod spectral;
pub mod verify;

use thiserror::Error;

pub use graph::{Graph, GraphError};

/// Any error raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Sandpile(#[from] sandpile::SandpileError),
    #[error(transparent)]
    Group(#[from] sandpile::GroupError),
    #[error(transparent)]
    Character(#[from] characters::CharacterError),
    #[error(transparent)]
    Gadget(#[from] characters::GadgetError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Mixing(#[from] mixing::MixingError),
}

impl Error {
    /// Whether the failure is a size budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::Character(characters::CharacterError::BudgetExceeded { .. })
                | Error::Spectral(spectral::SpectralError::BudgetExceeded(_))
                | Error::Mixing(mixing::MixingError::BudgetExceeded { .. })
        )
    }

    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Graph(_) => "graph",
            Error::Linalg(_) => "linalg",
            Error::Sandpile(_) => "sandpile",
            Error::Group(_) => "group",
            Error::Character(_) => "character",
            Error::Gadget(_) => "gadget",
            Error::Spectral(_) => "spectral",
            Error::Mixing(_) => "mixing",
        }
    }
}
