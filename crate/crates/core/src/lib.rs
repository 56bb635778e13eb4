//! Non-negative principal component analysis through its semidefinite
//! relaxation: random matrix ensembles, an ADMM solver with dual
//! certificates, projector witnesses, local heuristics and the embedding
//! used to compare planted and null spiked Wishart instances.

pub mod ensembles;
pub mod error;
pub mod heuristics;
pub mod matrix;
pub mod reduction;
pub mod sdp;
pub mod seed;
pub mod spectral;
pub mod witness;

pub use error::{Error, Result};
pub use matrix::SymMatrix;
pub use seed::{SeedSpec, Stream};
