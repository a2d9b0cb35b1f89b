//! Persona-aware graph neural networks.
//!
//! Nodes are soft-assigned to `K` clusters of feature space. Each node keeps
//! one embedding per cluster ("persona"), memberships diffuse over the graph
//! layer by layer, and neighborhood aggregation is weighted by how strongly
//! each neighbor belongs to the persona being updated. A `K = 1` model with
//! unit memberships is plain GraphSAGE.
//!
//! The crate is organised bottom-up:
//!
//! * [`numeric`] dense matrices, deterministic kernels and seeded streams
//! * [`autodiff`] an eager reverse-mode tape
//! * [`graph`] undirected graphs and link-prediction splits
//! * [`datasets`] on-disk graph bundles
//! * [`clustering`] k-means and Ward agglomerative clustering
//! * [`model`] the persona forward pass, readouts and the GraphSAGE baseline
//! * [`train`] losses, Adam, metrics and the two training protocols
//! * [`experiment`] run configuration, result tables and the command line

pub mod aggregate;
pub mod autodiff;
pub mod clustering;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod train;

pub use aggregate::Aggregator;
pub use error::{Error, Result};
pub use graph::Graph;
pub use numeric::{Matrix, RandomStream};
