//! Hierarchical latent-factor model with Indian Buffet Process connection
//! masks and spike-and-slab real-valued weights, plus a trans-dimensional
//! Metropolis-Hastings / Gibbs sampler that recovers how many hidden factors
//! explain a dataset.
//!
//! * [`model`]: domain types, densities, forward generation, the joint.
//! * [`ibp`]: Beta-Bernoulli masks, the IBP law and its culinary sampler.
//! * [`inference`]: the structure sampler and layer-wise recursion.
//! * [`oracle`]: brute-force and quadrature references used for validation.
//! * [`experiment`]: the factor-recovery sweep and its report.
//! * [`io`], [`config`], [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod ibp;
pub mod inference;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
