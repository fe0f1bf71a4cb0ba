//! Greedy layer-by-layer inference over a stack of hidden layers.
//!
//! Layer `l` is sampled with everything above it frozen: its factor priors
//! come from layer `l+1`'s weights and factors. Layer `l+1` then treats
//! layer `l`'s factors as data. The whole stack is revisited for a number of
//! outer loops, each chain continuing from where it stopped.

use ndarray::Array2;

use super::driver::{continue_chain, init_state};
use super::{ChainState, InferenceConfig, LayerModel, LayerRun, LayerSampler, ParentContext, TraceRow};
use crate::error::{Error, Result};
use crate::model::{log_joint, FactorMatrix, HyperParams, WeightLayer};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerwiseRun {
    /// Final state per hidden layer, bottom first.
    pub states: Vec<ChainState>,
    /// Trace of each layer's chain across all outer loops.
    pub traces: Vec<Vec<TraceRow>>,
    /// Joint log-density of the whole stack after each outer loop.
    pub outer_log_joint: Vec<f64>,
}

impl LayerwiseRun {
    fn from_single(run: LayerRun) -> Self {
        LayerwiseRun {
            outer_log_joint: vec![run.state.log_joint_cached()],
            states: vec![run.state],
            traces: vec![run.trace],
        }
    }
}

/// Rebuilds `state` so its child rows follow `new_ids`; rows for unseen ids
/// start unlinked.
fn realign_rows(state: &ChainState, old_ids: &[u64], new_ids: &[u64]) -> Result<ChainState> {
    if old_ids == new_ids {
        return Ok(state.clone());
    }
    let k = state.num_factors();
    let mut weights = WeightLayer::new(
        crate::ibp::BinaryMatrix::zeros(new_ids.len(), k),
        Array2::zeros((new_ids.len(), k)),
    )?;
    for (i, id) in new_ids.iter().enumerate() {
        if let Some(old) = old_ids.iter().position(|o| o == id) {
            for j in 0..k {
                if state.weights.mask.get(old, j) {
                    weights.mask.set(i, j, true);
                    weights.slab[[i, j]] = state.weights.slab[[old, j]];
                }
            }
        }
    }
    let mut out = ChainState::new(weights, state.factors.clone(), state.prior_sigma.clone())?;
    out.factor_ids = state.factor_ids.clone();
    out.next_id = state.next_id;
    Ok(out)
}

fn parent_of(states: &[Option<ChainState>], row_ids: &[Vec<u64>], layer: usize) -> Option<ParentContext> {
    states.get(layer + 1)?.as_ref().map(|upper| ParentContext {
        weights: upper.weights.clone(),
        factors: upper.factors.clone(),
        child_ids: row_ids[layer + 1].clone(),
    })
}

/// Infers `depth` hidden layers above `x`.
pub fn run_layerwise(x: &FactorMatrix, depth: usize, cfg: &InferenceConfig, hyper: &HyperParams) -> Result<LayerwiseRun> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if depth == 1 {
        let model = LayerModel::from_hyper(hyper, 0);
        return super::run_mh_layer(x, cfg, &model, None).map(LayerwiseRun::from_single);
    }

    let models: Vec<LayerModel> = (0..depth).map(|l| cfg.layer_model(LayerModel::from_hyper(hyper, l))).collect();
    let mut rngs: Vec<_> = (0..depth).map(|l| rng_from_seed(derive_seed(cfg.seed, &[l as u64]))).collect();
    let mut states: Vec<Option<ChainState>> = vec![None; depth];
    let mut row_ids: Vec<Vec<u64>> = vec![Vec::new(); depth];
    let mut traces: Vec<Vec<TraceRow>> = vec![Vec::new(); depth];
    let mut outer_log_joint = Vec::new();
    let x_ids: Vec<u64> = (0..x.rows() as u64).collect();

    for _outer in 0..cfg.layerwise_outer_loops {
        for layer in 0..depth {
            let (data, data_ids) = if layer == 0 {
                (x.values().clone(), x_ids.clone())
            } else {
                let below = states[layer - 1].as_ref().expect("lower layer sampled first");
                (below.factors.clone(), below.factor_ids.clone())
            };
            let parent = parent_of(&states, &row_ids, layer);
            let model = models[layer];
            let rng = &mut rngs[layer];
            let mut state = match &states[layer] {
                Some(prev) => realign_rows(prev, &row_ids[layer], &data_ids)?,
                None => init_state(&data, cfg.init_k, &model, parent.as_ref(), rng)?,
            };
            state.set_parent_context(parent.as_ref(), model.sigma_top, model.sigma_floor);
            state.refresh_activation();
            let sampler = LayerSampler::new(model, cfg.gibbs_step_scale);
            let run = continue_chain(&data, state, cfg.iterations, &sampler, rng)?;
            let offset = traces[layer].len();
            traces[layer].extend(run.trace.into_iter().map(|mut r| {
                r.iteration += offset;
                r
            }));
            states[layer] = Some(run.state);
            row_ids[layer] = data_ids;
        }

        let total = stack_log_joint(x, &states, &models)?;
        let converged = outer_log_joint
            .last()
            .is_some_and(|prev: &f64| (total - prev).abs() < cfg.convergence_tol);
        outer_log_joint.push(total);
        if converged {
            break;
        }
    }

    Ok(LayerwiseRun {
        states: states.into_iter().map(|s| s.expect("every layer sampled")).collect(),
        traces,
        outer_log_joint,
    })
}

/// Joint log-density of data and every layer: each layer's likelihood,
/// weight prior and count prior, plus the prior of the top factors.
fn stack_log_joint(x: &FactorMatrix, states: &[Option<ChainState>], models: &[LayerModel]) -> Result<f64> {
    let mut total = 0.0;
    let mut data = x.values().clone();
    let top = states.len() - 1;
    for (layer, (state, model)) in states.iter().zip(models).enumerate() {
        let state = state.as_ref().expect("every layer sampled");
        let lj = log_joint(&data, state, model)?;
        total += lj.likelihood + lj.weight_prior() + lj.count_prior;
        if layer == top {
            total += lj.factor_prior;
        }
        data = state.factors.clone();
    }
    Ok(total)
}
