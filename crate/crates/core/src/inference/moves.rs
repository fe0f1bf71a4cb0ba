//! Dimension-changing moves: add an unlinked factor or delete one.
//!
//! Ratios are the cancelled form. The Gaussian density of the new factor row
//! appears in both the target ratio and the proposal ratio and drops out, so
//! only the proposal bookkeeping, the mask prior and the count prior remain.

use super::{ChainState, LayerModel};
use crate::error::{Error, Result};
use crate::ibp::log_column_marginal;

/// Probability of the add proposal from a state with `k` factors of which
/// `k_plus` are linked: `K_+ / K`, or the configured constant when `K = 0`.
pub fn add_proposal_prob(k: usize, k_plus: usize, empty_add_proposal: f64) -> f64 {
    if k == 0 {
        empty_add_proposal
    } else {
        k_plus.max(1) as f64 / k as f64
    }
}

fn log_mask_prior(counts: &[usize], extra_empty: usize, n_rows: usize, alpha: f64) -> f64 {
    let k = counts.len() + extra_empty;
    if k == 0 {
        return 0.0;
    }
    let a = alpha / k as f64;
    counts.iter().map(|&m| log_column_marginal(m, n_rows, a)).sum::<f64>()
        + extra_empty as f64 * log_column_marginal(0, n_rows, a)
}

/// `log P(W | K+1) - log P(W | K)` for appending an all-zero mask column.
pub fn log_mask_ratio_add(counts: &[usize], n_rows: usize, alpha: f64) -> f64 {
    log_mask_prior(counts, 1, n_rows, alpha) - log_mask_prior(counts, 0, n_rows, alpha)
}

/// Log of the interior ratio of the add acceptance:
/// `[1/(K+1)] P(W|K+1) P(K+1) / ([K_+/K] P(W|K) P(K))`.
pub fn log_ratio_add(state: &ChainState, model: &LayerModel) -> f64 {
    let k = state.num_factors();
    let n = state.num_rows();
    let p = model.priors;
    let q_add = add_proposal_prob(k, state.num_active(), model.empty_add_proposal);
    let mask = log_mask_ratio_add(state.weights().mask.column_counts(), n, p.alpha_ibp);
    let count = p.factor_count_rate(n).ln() - ((k + 1) as f64).ln();
    -((k + 1) as f64).ln() - q_add.ln() + mask + count
}

pub fn accept_prob_add(state: &ChainState, model: &LayerModel) -> f64 {
    log_ratio_add(state, model).exp().min(1.0)
}

/// Log of the interior ratio for deleting unlinked factor `k`, the exact
/// reciprocal of the add ratio evaluated from the reduced state.
pub fn log_ratio_delete(state: &ChainState, k: usize, model: &LayerModel) -> Result<f64> {
    let big_k = state.num_factors();
    if k >= big_k {
        return Err(Error::IllegalMove(format!("factor {k} out of range (K = {big_k})")));
    }
    let counts = state.weights().mask.column_counts();
    if counts[k] > 0 {
        return Err(Error::IllegalMove(format!(
            "factor {k} has {} links; only unlinked factors can be deleted",
            counts[k]
        )));
    }
    let n = state.num_rows();
    let p = model.priors;
    let mut reduced: Vec<usize> = counts.to_vec();
    reduced.remove(k);
    // Deleting an empty column leaves K_+ unchanged.
    let q_add_back = add_proposal_prob(big_k - 1, state.num_active(), model.empty_add_proposal);
    let mask = -log_mask_ratio_add(&reduced, n, p.alpha_ibp);
    let count = (big_k as f64).ln() - p.factor_count_rate(n).ln();
    Ok(q_add_back.ln() + (big_k as f64).ln() + mask + count)
}

pub fn accept_prob_delete(state: &ChainState, k: usize, model: &LayerModel) -> Result<f64> {
    Ok(log_ratio_delete(state, k, model)?.exp().min(1.0))
}
