use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::density::{floor_sigma, normal_logpdf_sd, poisson_logpmf, slab_marginal_logpdf};
use crate::error::{Error, Result};
use crate::ibp::logprob_mask_marginal;
use crate::inference::{ChainState, LayerModel};

/// The four factors of the single-layer joint `P(X, W, Y, K)`, in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogJoint {
    /// `log P(X | W, Y)`
    pub likelihood: f64,
    /// `log P(Y | K)`
    pub factor_prior: f64,
    /// Mask part of `log P(W | K)`, with the inclusion probabilities
    /// integrated out.
    pub mask_prior: f64,
    /// Slab part of `log P(W | K)`, with the column variances integrated out.
    pub slab_prior: f64,
    /// `log P(K)` under `Poisson(alpha * H_N)`.
    pub count_prior: f64,
}

impl LogJoint {
    pub fn weight_prior(&self) -> f64 {
        self.mask_prior + self.slab_prior
    }

    pub fn total(&self) -> f64 {
        self.likelihood + self.factor_prior + self.weight_prior() + self.count_prior
    }
}

/// `sum_{n,t} log N(x_{n,t}; 0, max(|a_{n,t}|, floor)^2)`.
pub fn log_likelihood(x: &Array2<f64>, activation: &Array2<f64>, sigma_floor: f64) -> f64 {
    x.iter()
        .zip(activation.iter())
        .map(|(&xv, &a)| normal_logpdf_sd(xv, floor_sigma(a, sigma_floor)))
        .sum()
}

/// `log P(W | K)` split into mask and slab parts.
pub fn log_weight_prior(weights: &super::WeightLayer, alpha_ibp: f64, ig_shape: f64, ig_scale: f64) -> (f64, f64) {
    let mask = if weights.n_cols() == 0 {
        0.0
    } else {
        logprob_mask_marginal(&weights.mask, alpha_ibp).expect("alpha validated")
    };
    let slab = (0..weights.n_cols())
        .map(|k| slab_marginal_logpdf(&weights.active_slab(k), ig_shape, ig_scale))
        .sum();
    (mask, slab)
}

/// Evaluates the joint from scratch; the state's activation cache is not
/// consulted.
pub fn log_joint(x: &Array2<f64>, state: &ChainState, model: &LayerModel) -> Result<LogJoint> {
    let w = state.weights();
    let y = state.factors();
    if x.nrows() != w.n_rows() || x.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "data is {:?}, state expects {}x{}",
            x.dim(),
            w.n_rows(),
            y.ncols()
        )));
    }
    let activation = w.weights().dot(y);
    let likelihood = log_likelihood(x, &activation, model.sigma_floor);
    let factor_prior = y
        .iter()
        .zip(state.prior_sigma().iter())
        .map(|(&v, &s)| normal_logpdf_sd(v, s))
        .sum();
    let p = model.priors;
    let (mask_prior, slab_prior) = log_weight_prior(w, p.alpha_ibp, p.ig_shape, p.ig_scale);
    let count_prior = poisson_logpmf(state.num_factors(), p.factor_count_rate(w.n_rows()));
    Ok(LogJoint {
        likelihood,
        factor_prior,
        mask_prior,
        slab_prior,
        count_prior,
    })
}
