//! Stochastic p+q graph convolutional networks.
//!
//! The crate builds stochastic grid graphs over pixel lattices, runs Chebyshev
//! spectral convolutions over their coarsening hierarchies, fuses a spatial and
//! an optical-flow temporal branch, and trains the whole thing with focal loss
//! and a two-phase transfer schedule (source pre-training, target fine-tuning).
//!
//! Modules map onto the pipeline stages:
//! - [`grid_graph`]: p+q graph construction, normalized/scaled Laplacians,
//!   heavy-edge-matching coarsening hierarchies.
//! - [`cheb`]: Chebyshev convolution layers with analytic gradients, ReLU,
//!   graph max pooling and dense layers.
//! - [`network`]: SGCN stacks, the dual architecture, branch fusion, dropout.
//! - [`optical_flow`]: Horn-Schunck flow, flow statistics, frame selection.
//! - [`train`]: losses (cross-entropy, focal), ADAM, the two training phases,
//!   evaluation reports.
//! - [`data`]: labeled image sequences, synthetic motion datasets, PGM disk
//!   layout.
//!
//! Everything is deterministic given the seeds recorded in the artifacts.

pub mod cheb;
pub mod data;
pub mod error;
pub mod grid_graph;
pub mod network;
pub mod optical_flow;
pub mod seeding;
pub mod sparse;
pub mod train;

pub use error::{Error, Result};
