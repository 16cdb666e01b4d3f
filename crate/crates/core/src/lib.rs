//! Bayesian inference of gene regulatory networks from expression data,
//! with ChIP-binding and promoter-motif probabilities entering through a
//! weighted prior on each regulation indicator.
//!
//! The crate is organised by stage:
//!
//! - [`model`]: data containers and the indicator prior,
//! - [`likelihood`]: the linear expression model and cached residuals,
//! - [`sampler`]: the Gibbs sampler and multi-chain runs,
//! - [`summary`]: inclusion probabilities, targets, effects and weights,
//! - [`diagnostics`]: split R-hat and effective sample size,
//! - [`validation`]: knockout, enrichment and baseline statistics,
//! - [`synth`]: a forward simulator and exact oracles,
//! - [`io`]: delimited file formats, manifests and the command line.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod matrix;
pub mod model;
pub mod numeric;
pub mod sampler;
pub mod summary;
pub mod synth;
pub mod validation;

pub use error::{Error, Result};
pub use matrix::Matrix;
