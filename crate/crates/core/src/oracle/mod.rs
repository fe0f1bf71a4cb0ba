//! Independent reference computations: exhaustive enumeration, quadrature,
//! Monte-Carlo class histograms, grid targets for the single-site kernels,
//! and a generate-then-sample harness. Slow by design.

mod conditional;
mod enumerate;
mod geweke;
mod lof_hist;
mod predictive;
mod quad;
pub mod validation;

pub use conditional::{
    factor_conditional_target, sample_factor_kernel, sample_weight_kernel, weight_conditional_target,
    ConditionalTarget,
};
pub use enumerate::enumerate_masks;
pub use geweke::{geweke_test, GewekeConfig, MomentComparison};
pub use lof_hist::{
    drop_empty_columns, enumerate_lof_classes, first_selection_counts, logprob_mask_ibp_first_selection,
    mc_lof_histogram, ClassFrequency, LofHistogram,
};
pub use predictive::{marginal_weight_quadrature, slab_predictive_quadrature, QuadraturePredictive};
pub use quad::{
    default_nodes, grid_integrate, half_line_nodes, log_integrate_half_line, log_integrate_unit, tanh_sinh_nodes,
    trapezoid, Grid1D, HalfLineNode, UnitNode,
};
