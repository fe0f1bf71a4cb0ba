use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{accept_prob_add, accept_prob_delete, ChainState, LayerModel, LayerSampler, MoveStats, ParentContext};
use crate::error::{Error, Result};
use crate::model::{log_joint, sample_weight_layer, FactorMatrix};
use crate::rng::{rng_from_seed, ChainRng};

/// How many factors a chain starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Fixed(usize),
    /// Uniform over the inclusive range.
    Uniform { lo: usize, hi: usize },
}

impl InitStrategy {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            InitStrategy::Fixed(k) => k,
            InitStrategy::Uniform { lo, hi } => rng.random_range(lo..=hi),
        }
    }

    /// Short label used in report file names.
    pub fn label(&self) -> String {
        match *self {
            InitStrategy::Fixed(k) => format!("fixed{k}"),
            InitStrategy::Uniform { lo, hi } => format!("uniform{lo}to{hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceConfig {
    pub iterations: usize,
    pub init_k: InitStrategy,
    pub seed: u64,
    /// Random-walk proposal standard deviation as a multiple of the current
    /// prior scale.
    pub gibbs_step_scale: f64,
    pub layerwise_outer_loops: usize,
    /// Stop the layer-wise loop once the total log-joint moves by less than
    /// this between outer loops.
    pub convergence_tol: f64,
    /// Proposal weight standing in for `K_+ / K` when `K = 0`.
    pub empty_add_proposal: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            iterations: 200,
            init_k: InitStrategy::Fixed(2),
            seed: 0,
            gibbs_step_scale: 0.5,
            layerwise_outer_loops: 3,
            convergence_tol: 1e-3,
            empty_add_proposal: 1.0,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if !(self.gibbs_step_scale > 0.0 && self.gibbs_step_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gibbs_step_scale must be positive, got {}",
                self.gibbs_step_scale
            )));
        }
        if let InitStrategy::Uniform { lo, hi } = self.init_k {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("empty init range {lo}..={hi}")));
            }
        }
        if self.layerwise_outer_loops == 0 {
            return Err(Error::InvalidParameter("layerwise_outer_loops must be at least 1".into()));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidParameter("convergence_tol must be non-negative".into()));
        }
        if !(self.empty_add_proposal > 0.0 && self.empty_add_proposal <= 1.0) {
            return Err(Error::InvalidParameter("empty_add_proposal must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub(crate) fn layer_model(&self, base: LayerModel) -> LayerModel {
        LayerModel {
            empty_add_proposal: self.empty_add_proposal,
            ..base
        }
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub log_joint: f64,
    pub accepted_adds: u64,
    pub accepted_deletes: u64,
}

/// Output of a single-layer run.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerRun {
    pub state: ChainState,
    pub trace: Vec<TraceRow>,
    pub stats: MoveStats,
}

impl LayerRun {
    pub fn k_trace(&self) -> Vec<usize> {
        self.trace.iter().map(|r| r.k).collect()
    }
}

/// Draws a starting state: `K` from the strategy, weights from the prior,
/// factors from their prior.
pub fn init_state<R: Rng + ?Sized>(
    x: &Array2<f64>,
    init: InitStrategy,
    model: &LayerModel,
    parent: Option<&ParentContext>,
    rng: &mut R,
) -> Result<ChainState> {
    let k = init.draw(rng);
    let p = model.priors;
    let weights = sample_weight_layer(x.nrows(), k, p.alpha_ibp, p.ig_shape, p.ig_scale, rng)?;
    let mut state = ChainState::with_uniform_prior(weights, Array2::zeros((k, x.ncols())), model.sigma_top)?;
    state.set_parent_context(parent, model.sigma_top, model.sigma_floor);
    for (y, &s) in state.factors.iter_mut().zip(state.prior_sigma.iter()) {
        let z: f64 = StandardNormal.sample(rng);
        *y = s * z;
    }
    state.refresh_activation();
    state.log_joint_cached = log_joint(x, &state, model)?.total();
    Ok(state)
}

/// Removes every factor whose mask column is empty. Returns how many went.
pub fn prune_empty_factors(state: &mut ChainState) -> usize {
    let mut removed = 0;
    let mut k = 0;
    while k < state.num_factors() {
        if state.weights.mask.column_count(k) == 0 {
            state.remove_factor(k);
            removed += 1;
        } else {
            k += 1;
        }
    }
    removed
}

fn sample_new_row<R: Rng + ?Sized>(t: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    (0..t)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        })
        .collect()
}

/// Proposes appending an unlinked factor; returns whether it was accepted.
pub fn propose_add<R: Rng + ?Sized>(state: &mut ChainState, model: &LayerModel, stats: &mut MoveStats, rng: &mut R) -> bool {
    stats.add_proposed += 1;
    let prob = accept_prob_add(state, model);
    if rng.random::<f64>() < prob {
        let row = sample_new_row(state.num_instances(), model.sigma_top, rng);
        state.push_factor(&row, model.sigma_top);
        stats.add_accepted += 1;
        true
    } else {
        false
    }
}

/// Proposes deleting unlinked factor `k`; returns whether it was accepted.
pub fn propose_delete<R: Rng + ?Sized>(
    state: &mut ChainState,
    k: usize,
    model: &LayerModel,
    stats: &mut MoveStats,
    rng: &mut R,
) -> Result<bool> {
    let prob = accept_prob_delete(state, k, model)?;
    stats.delete_proposed += 1;
    if rng.random::<f64>() < prob {
        state.remove_factor(k);
        stats.delete_accepted += 1;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// One iteration of the structure sampler.
///
/// For each child row `i`: examine the next factor `k` in cyclic order and
/// propose adding a factor when `k` has links outside row `i`, or deleting
/// `k` when it has none at all; then update row `i` of the weights, then
/// every factor value (instance by instance).
pub fn sweep<R: Rng + ?Sized>(
    x: &Array2<f64>,
    state: &mut ChainState,
    sampler: &LayerSampler,
    cursor: &mut usize,
    stats: &mut MoveStats,
    rng: &mut R,
) -> Result<()> {
    let model = &sampler.model;
    for i in 0..state.num_rows() {
        let big_k = state.num_factors();
        if big_k == 0 {
            propose_add(state, model, stats, rng);
        } else {
            let k = *cursor % big_k;
            *cursor = cursor.wrapping_add(1);
            if state.weights.mask.column_count_except(i, k) > 0 {
                propose_add(state, model, stats, rng);
            } else if state.weights.mask.column_count(k) == 0 {
                propose_delete(state, k, model, stats, rng)?;
            }
        }
        for k in 0..state.num_factors() {
            sampler.update_weight(x, state, i, k, stats, rng);
        }
        for t in 0..state.num_instances() {
            for k in 0..state.num_factors() {
                sampler.update_factor(x, state, k, t, stats, rng);
            }
        }
    }
    state.refresh_activation();
    state.log_joint_cached = log_joint(x, state, model)?.total();
    Ok(())
}

/// Continues a chain from `state` for `iterations` sweeps.
pub fn continue_chain(
    x: &Array2<f64>,
    mut state: ChainState,
    iterations: usize,
    sampler: &LayerSampler,
    rng: &mut ChainRng,
) -> Result<LayerRun> {
    let mut stats = MoveStats::default();
    let mut trace = Vec::with_capacity(iterations);
    let mut cursor = 0usize;
    for iteration in 0..iterations {
        let before = stats;
        sweep(x, &mut state, sampler, &mut cursor, &mut stats, rng)?;
        trace.push(TraceRow {
            iteration,
            k: state.num_factors(),
            log_joint: state.log_joint_cached,
            accepted_adds: stats.add_accepted - before.add_accepted,
            accepted_deletes: stats.delete_accepted - before.delete_accepted,
        });
    }
    Ok(LayerRun { state, trace, stats })
}

/// Runs the single-layer structure sampler on data `x` (rows = child units,
/// columns = instances).
pub fn run_mh_layer(
    x: &FactorMatrix,
    cfg: &InferenceConfig,
    model: &LayerModel,
    parent: Option<&ParentContext>,
) -> Result<LayerRun> {
    let mut rng = rng_from_seed(cfg.seed);
    run_mh_layer_with(x, cfg, model, parent, &mut rng)
}

pub(crate) fn run_mh_layer_with(
    x: &FactorMatrix,
    cfg: &InferenceConfig,
    model: &LayerModel,
    parent: Option<&ParentContext>,
    rng: &mut ChainRng,
) -> Result<LayerRun> {
    let model = cfg.layer_model(*model);
    let data = x.values();
    let state = init_state(data, cfg.init_k, &model, parent, rng)?;
    let sampler = LayerSampler::new(model, cfg.gibbs_step_scale);
    continue_chain(data, state, cfg.iterations, &sampler, rng)
}
