//! Optimal (maximum size, then maximum weight) matchings on trees and sparse
//! random graphs through two-level lexicographic message passing.
//!
//! - [`genfn`]: offspring laws, generating functions, fixed points, densities.
//! - [`randgraph`]: random graphs, Galton-Watson trees, weights, balls.
//! - [`exact`]: brute-force and dynamic-programming oracles, leaf removal.
//! - [`bp`]: message passing, boundary conditions, certification.
//! - [`rde`]: numerical solution of the distributional fixed-point systems.

pub mod bp;
pub mod error;
pub mod exact;
pub mod genfn;
pub mod graph;
pub mod randgraph;
pub mod rde;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Edge, Root, WeightedGraph};
pub use rng::RngSeed;
