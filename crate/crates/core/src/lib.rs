//! Random sparsifications of pseudorandom graphs.
//!
//! Host generators, spectral certification, expansion / matching /
//! Hamiltonicity checks, the triangle hypergraph with its forbidden
//! configurations, a sequential coupling between `G_p` and a random
//! sub-hypergraph of triangles, spread triangle-factor samplers and the
//! Monte Carlo threshold experiments built on top of them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod hypergraph;
pub mod par;
pub mod rng;
pub mod spectral;
pub mod spread;
pub mod structure;

pub use graph::{Graph, GraphError, VertexSet};
pub use rng::RngStream;
