//! Fairness-aware spectral graph filtering.
//!
//! The crate builds the normalized Laplacian of an undirected graph, takes
//! its full eigendecomposition, and designs a frequency response that damps
//! the graph frequencies through which a binary sensitive attribute leaks
//! into neighborhood aggregation. Around that core it provides the bias
//! measure ρ with its spectral upper bound, group-fairness metrics, a small
//! two-layer GCN, dataset loading and generation, and an experiment harness
//! that compares a GCN trained on raw features with one trained on filtered
//! features.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | `Graph`, Â and L |
//! | [`spectral`] | `Spectrum`, GFT, filtering, spectrum profiles |
//! | [`fair_filter`] | bias coefficients, cutoff set, fair/uniform filters, Aᶠ, ρ |
//! | [`metrics`] | accuracy, Δ_SP, Δ_EO |
//! | [`gcn`] | two-layer GCN, gradients, training |
//! | [`data`] | loaders, SBM generator, splits |
//! | [`harness`] | configuration and the `spectrum`/`filter`/`experiment`/`generate` commands |

pub mod data;
pub mod error;
pub mod fair_filter;
pub mod gcn;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::Graph;
pub use matrix::DenseMatrix;
pub use spectral::{FilterResponse, GraphSignal, Spectrum};
