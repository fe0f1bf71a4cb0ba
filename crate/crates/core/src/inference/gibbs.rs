//! Single-site MH-within-Gibbs kernels for weights and factors.
//!
//! The observation scale `|sum_j W_nj Y_jt|` depends on both the weight and
//! the factor being updated through an absolute value, so neither full
//! conditional is conjugate. Each kernel is a Metropolis-Hastings step whose
//! target is the exact one-dimensional conditional.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ChainState, LayerModel, MoveStats};
use crate::model::density::floor_sigma;
use crate::model::SlabPredictive;

/// Observation log-density up to the `-0.5 log 2 pi` constant.
#[inline]
fn cell_ll(x: f64, activation: f64, sigma_floor: f64) -> f64 {
    let s = floor_sigma(activation, sigma_floor);
    let z = x / s;
    -0.5 * z * z - s.ln()
}

/// Change in row `n`'s log-likelihood when `W[n,k]` moves by `delta`.
pub(crate) fn weight_loglik_delta(
    x: &Array2<f64>,
    state: &ChainState,
    n: usize,
    k: usize,
    delta: f64,
    sigma_floor: f64,
) -> f64 {
    let xr = x.row(n);
    let ar = state.activation.row(n);
    let yr = state.factors.row(k);
    let mut acc = 0.0;
    for ((&xv, &a), &y) in xr.iter().zip(ar.iter()).zip(yr.iter()) {
        acc += cell_ll(xv, a + delta * y, sigma_floor) - cell_ll(xv, a, sigma_floor);
    }
    acc
}

/// Change in column `t`'s log-likelihood when `Y[k,t]` moves by `delta`.
pub(crate) fn factor_loglik_delta(
    x: &Array2<f64>,
    state: &ChainState,
    k: usize,
    t: usize,
    delta: f64,
    sigma_floor: f64,
) -> f64 {
    let mut acc = 0.0;
    for n in 0..state.num_rows() {
        if state.weights.mask.get(n, k) {
            let w = state.weights.slab[[n, k]];
            let xv = x[[n, t]];
            let a = state.activation[[n, t]];
            acc += cell_ll(xv, a + w * delta, sigma_floor) - cell_ll(xv, a, sigma_floor);
        }
    }
    acc
}

/// Prior-predictive law of `W[n,k]` given the rest of column `k`, with the
/// column's inclusion probability and slab variance integrated out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPredictive {
    /// `P(W[n,k] = 0 | rest)`.
    pub spike: f64,
    /// `P(W[n,k] != 0 | rest)`.
    pub slab: f64,
    /// Density of the value given that it is nonzero.
    pub value: SlabPredictive,
}

impl WeightPredictive {
    /// `log P(slab) - log P(spike)`.
    pub fn log_odds(&self) -> f64 {
        self.slab.ln() - self.spike.ln()
    }
}

/// Closed-form prior predictive for one weight entry: a Beta-Bernoulli
/// spike/slab split and a Student-t value from normal-inverse-gamma
/// conjugacy over the column's other selected entries.
pub fn weight_predictive(state: &ChainState, n: usize, k: usize, model: &LayerModel) -> WeightPredictive {
    let w = &state.weights;
    let rows = w.n_rows();
    let a = model.priors.alpha_ibp / w.n_cols() as f64;
    let m_minus = w.mask.column_count_except(n, k);
    let denom = rows as f64 + a;
    let (count, ss) = (0..rows)
        .filter(|&i| i != n && w.mask.get(i, k))
        .fold((0usize, 0.0), |(c, s), i| (c + 1, s + w.slab[[i, k]].powi(2)));
    WeightPredictive {
        spike: (rows - m_minus) as f64 / denom,
        slab: (m_minus as f64 + a) / denom,
        value: SlabPredictive::from_stats(count, ss, model.priors.ig_shape, model.priors.ig_scale),
    }
}

/// The two single-site kernels with a fixed random-walk scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSampler {
    pub model: LayerModel,
    /// Random-walk step as a multiple of the current prior scale.
    pub step_scale: f64,
}

#[inline]
fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

impl LayerSampler {
    pub fn new(model: LayerModel, step_scale: f64) -> Self {
        LayerSampler { model, step_scale }
    }

    fn set_weight(&self, state: &mut ChainState, n: usize, k: usize, on: bool, value: f64) {
        let old = state.weights.weight(n, k);
        let new = if on { value } else { 0.0 };
        state.weights.mask.set(n, k, on);
        state.weights.slab[[n, k]] = new;
        let delta = new - old;
        if delta != 0.0 {
            let yr = state.factors.row(k).to_owned();
            state.activation.row_mut(n).scaled_add(delta, &yr);
        }
    }

    /// One update of `W[n,k]`: a spike/slab toggle whose slab proposal is
    /// the prior predictive, then (when in the slab) a random-walk step on
    /// the value. Returns the new weight.
    pub fn update_weight<R: Rng + ?Sized>(
        &self,
        x: &Array2<f64>,
        state: &mut ChainState,
        n: usize,
        k: usize,
        stats: &mut MoveStats,
        rng: &mut R,
    ) -> f64 {
        let floor = self.model.sigma_floor;
        let pred = weight_predictive(state, n, k, &self.model);
        let log_odds = pred.log_odds();

        stats.weight_proposed += 1;
        if state.weights.mask.get(n, k) {
            let w = state.weights.slab[[n, k]];
            let dl = weight_loglik_delta(x, state, n, k, -w, floor);
            if accept(dl - log_odds, rng) {
                self.set_weight(state, n, k, false, 0.0);
                stats.weight_accepted += 1;
            }
        } else {
            let proposal = pred.value.sample(rng);
            let dl = weight_loglik_delta(x, state, n, k, proposal, floor);
            if accept(dl + log_odds, rng) {
                self.set_weight(state, n, k, true, proposal);
                stats.weight_accepted += 1;
            }
        }

        if state.weights.mask.get(n, k) {
            stats.weight_proposed += 1;
            let w = state.weights.slab[[n, k]];
            let z: f64 = StandardNormal.sample(rng);
            let proposal = w + self.step_scale * pred.value.scale2.sqrt() * z;
            if proposal != 0.0 {
                let dl = weight_loglik_delta(x, state, n, k, proposal - w, floor);
                let dp = pred.value.logpdf(proposal) - pred.value.logpdf(w);
                if accept(dl + dp, rng) {
                    self.set_weight(state, n, k, true, proposal);
                    stats.weight_accepted += 1;
                }
            }
        }
        state.weights.weight(n, k)
    }

    /// One random-walk update of `Y[k,t]` against its Gaussian prior and the
    /// likelihood of instance `t`. Returns the new value.
    pub fn update_factor<R: Rng + ?Sized>(
        &self,
        x: &Array2<f64>,
        state: &mut ChainState,
        k: usize,
        t: usize,
        stats: &mut MoveStats,
        rng: &mut R,
    ) -> f64 {
        let sigma = state.prior_sigma[[k, t]];
        let y = state.factors[[k, t]];
        let z: f64 = StandardNormal.sample(rng);
        let proposal = y + self.step_scale * sigma * z;
        let delta = proposal - y;
        let dl = factor_loglik_delta(x, state, k, t, delta, self.model.sigma_floor);
        let dp = -(proposal * proposal - y * y) / (2.0 * sigma * sigma);
        stats.factor_proposed += 1;
        if accept(dl + dp, rng) {
            state.factors[[k, t]] = proposal;
            for n in 0..state.num_rows() {
                if state.weights.mask.get(n, k) {
                    state.activation[[n, t]] += state.weights.slab[[n, k]] * delta;
                }
            }
            stats.factor_accepted += 1;
            proposal
        } else {
            y
        }
    }
}

/// Updates `W[n,k]` once with the default kernel.
pub fn gibbs_update_weight<R: Rng + ?Sized>(
    x: &Array2<f64>,
    state: &mut ChainState,
    n: usize,
    k: usize,
    sampler: &LayerSampler,
    rng: &mut R,
) -> f64 {
    let mut stats = MoveStats::default();
    sampler.update_weight(x, state, n, k, &mut stats, rng)
}

/// Updates `Y[k,t]` once with the default kernel.
pub fn gibbs_update_factor<R: Rng + ?Sized>(
    x: &Array2<f64>,
    state: &mut ChainState,
    k: usize,
    t: usize,
    sampler: &LayerSampler,
    rng: &mut R,
) -> f64 {
    let mut stats = MoveStats::default();
    sampler.update_factor(x, state, k, t, &mut stats, rng)
}
