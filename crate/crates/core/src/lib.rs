//! Link prediction on edgeless attributed graphs.
//!
//! The pipeline wires node attributes into an initial structure, diffuses it
//! into two personalized-PageRank views, trains a pair of graph-convolutional
//! encoders with a cross-scale contrastive objective, and hands the averaged
//! node embeddings to a pairwise-similarity clustering backbone that labels
//! every node pair as linked or unlinked.
//!
//! Module map:
//!
//! - [`numerics`]: dense matrices, LU inverse, Jacobi SVD, exact 1-D 2-means, Adam.
//! - [`graph`]: the attributed-graph record, its TSV format, normalization, synthetic graphs.
//! - [`augment`]: structure initialization and PPR diffusion into two views.
//! - [`encoder`]: single-layer GCN/SGC encoding, mean pooling, dimension alignment.
//! - [`ssl`]: corruption, bilinear discriminator, contrastive objective, training loop.
//! - [`psc`]: similarity scoring and the cluster-to-link labeling rule.
//! - [`eval`]: AUC/AP, assortativity, spectrum alignment, downstream classification.

pub mod augment;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod numerics;
pub mod psc;
pub mod ssl;

pub use error::{Error, Result};
pub use graph::{AttributedGraph, EdgelessView};
pub use numerics::{DenseMatrix, RngStream};
