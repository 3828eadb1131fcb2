//! Identification of influential simplices in simplicial complexes.
//!
//! The crate covers the full pipeline: building complexes (edge lists with
//! clique lifting, or explicit simplex lists), higher-order hierarchical
//! operators between a hub layer and its fringe layers, classical centrality
//! features and baselines, SIR / higher-order SIR contagion used to label
//! simplices, a spectral ranking network trained with a pairwise loss, and
//! Kendall-tau evaluation.

pub mod centrality;
pub mod complex;
pub mod diffusion;
pub mod error;
pub mod evaluation;
pub mod hoh;
pub mod model;
pub mod scores;
pub mod sparse;

pub use complex::{Simplex, SimplicialComplex};
pub use error::{Error, Result};
pub use scores::InfluenceScores;
pub use sparse::CsrMatrix;
