//! Metropolis-Hastings / Gibbs inference of one hidden layer's structure,
//! and the greedy recursion over a stack of layers.

mod driver;
mod gibbs;
mod layerwise;
mod moves;
mod state;

pub use driver::{
    continue_chain, init_state, prune_empty_factors, propose_add, propose_delete, run_mh_layer, sweep,
    InferenceConfig, InitStrategy, LayerRun, TraceRow,
};
pub use gibbs::{gibbs_update_factor, gibbs_update_weight, weight_predictive, LayerSampler, WeightPredictive};
pub use layerwise::{run_layerwise, LayerwiseRun};
pub use moves::{
    accept_prob_add, accept_prob_delete, add_proposal_prob, log_mask_ratio_add, log_ratio_add, log_ratio_delete,
};
pub use state::{ChainState, LayerModel, MoveStats, ParentContext};
