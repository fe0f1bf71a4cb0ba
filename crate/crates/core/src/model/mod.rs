//! Domain types of the hierarchical latent-factor model, its densities, and
//! forward generation.
//!
//! Parent influence flows through the *scale* of each child unit, not its
//! mean: a child is drawn from `N(0, s^2)` with `s = |sum_j W_ij Y_j|`
//! clamped below by `sigma_floor`. This differs from conventional linear
//! factor analysis.

pub mod density;
mod factors;
mod generate;
mod hyper;
mod joint;
mod weights;

pub use density::{
    poisson_logpmf, propagate_sigma, slab_marginal_logpdf, spike_slab_logpdf, student_t_logpdf, SlabPredictive,
    SpikeSlabLaw,
};
pub use factors::FactorMatrix;
pub use generate::{generate_dataset, sample_factor_column, GenerativeModel};
pub use hyper::{HyperParams, LayerPriors};
pub use joint::{log_joint, log_likelihood, log_weight_prior, LogJoint};
pub use weights::{sample_weight_layer, WeightLayer};
