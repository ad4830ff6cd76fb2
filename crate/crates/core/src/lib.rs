//! Graph signal processing and graph neural networks with relative-perturbation
//! stability analysis.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: graphs, shift operators, signals, permutations, k-NN pruning.
//! - [`spectral`]: eigendecomposition, graph Fourier transform, frequency
//!   responses and integral-Lipschitz estimates.
//! - [`filters`]: graph convolutions, filter banks and filter distances.
//! - [`gnn`]: the layered GNN, its gradients, the stability penalty and training.
//! - [`perturbation`]: relative perturbation models and the GSO distance.
//! - [`stability`]: bound calculators and empirical stability experiments.
//! - [`movielens`]: MovieLens-100k ingestion and rating-prediction tasks.
//! - [`experiments`]: the command implementations behind the `gnnstab` binary.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod filters;
pub mod gnn;
pub mod graph;
pub mod movielens;
pub mod perturbation;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
