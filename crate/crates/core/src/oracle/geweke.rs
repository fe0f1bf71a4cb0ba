//! Generate-then-sample consistency check for the fixed-dimension kernels.
//!
//! Path (a) draws parameters from the prior. Path (b) starts each of many
//! independent chains from a prior draw with data, then alternates one pass
//! of the weight and factor kernels with a fresh draw of the data. If the
//! kernels leave their conditionals invariant, both paths sample the prior.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::inference::{ChainState, LayerModel, LayerSampler, MoveStats};
use crate::model::density::floor_sigma;
use crate::model::sample_weight_layer;
use crate::rng::ChainRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GewekeConfig {
    pub n_rows: usize,
    pub n_instances: usize,
    pub n_factors: usize,
    pub draws: usize,
    /// Kernel/data alternations per chain.
    pub steps: usize,
    pub model: LayerModel,
    pub step_scale: f64,
}

impl Default for GewekeConfig {
    /// N=4, T=10, K=2. The slab variance prior is IG(5, 4) so that the
    /// fourth moments of W, and with them the standard errors of the
    /// second moments, exist.
    fn default() -> Self {
        let hyper = crate::model::HyperParams::single_layer(2, 3.0, 5.0, 4.0);
        GewekeConfig {
            n_rows: 4,
            n_instances: 10,
            n_factors: 2,
            draws: 20_000,
            steps: 10,
            model: LayerModel::from_hyper(&hyper, 0),
            step_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentComparison {
    pub name: &'static str,
    pub prior_mean: f64,
    pub prior_se: f64,
    pub chain_mean: f64,
    pub chain_se: f64,
}

impl MomentComparison {
    pub fn z_score(&self) -> f64 {
        (self.prior_mean - self.chain_mean) / (self.prior_se.powi(2) + self.chain_se.powi(2)).sqrt()
    }
}

const NAMES: [&str; 5] = ["mean W", "mean W^2", "mean Y", "mean Y^2", "zero fraction W"];

fn statistics(state: &ChainState) -> [f64; 5] {
    let w = state.weights().weights();
    let y = state.factors();
    let nw = w.len() as f64;
    let ny = y.len() as f64;
    [
        w.sum() / nw,
        w.mapv(|v| v * v).sum() / nw,
        y.sum() / ny,
        y.mapv(|v| v * v).sum() / ny,
        w.iter().filter(|&&v| v == 0.0).count() as f64 / nw,
    ]
}

fn prior_state<R: Rng + ?Sized>(cfg: &GewekeConfig, rng: &mut R) -> Result<ChainState> {
    let p = cfg.model.priors;
    let weights = sample_weight_layer(cfg.n_rows, cfg.n_factors, p.alpha_ibp, p.ig_shape, p.ig_scale, rng)?;
    let sigma = cfg.model.sigma_top;
    let factors = Array2::from_shape_simple_fn((cfg.n_factors, cfg.n_instances), || {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    });
    ChainState::with_uniform_prior(weights, factors, sigma)
}

fn draw_data<R: Rng + ?Sized>(state: &ChainState, floor: f64, rng: &mut R) -> Array2<f64> {
    state.activation().mapv(|a| {
        let z: f64 = StandardNormal.sample(rng);
        floor_sigma(a, floor) * z
    })
}

fn mean_and_se(rows: &[[f64; 5]], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn geweke_test(cfg: &GewekeConfig, rng: &mut ChainRng) -> Result<Vec<MomentComparison>> {
    let sampler = LayerSampler::new(cfg.model, cfg.step_scale);
    let floor = cfg.model.sigma_floor;
    let mut prior_rows = Vec::with_capacity(cfg.draws);
    let mut chain_rows = Vec::with_capacity(cfg.draws);
    let mut stats = MoveStats::default();
    for _ in 0..cfg.draws {
        prior_rows.push(statistics(&prior_state(cfg, rng)?));

        let mut state = prior_state(cfg, rng)?;
        let mut x = draw_data(&state, floor, rng);
        for _ in 0..cfg.steps {
            for n in 0..cfg.n_rows {
                for k in 0..cfg.n_factors {
                    sampler.update_weight(&x, &mut state, n, k, &mut stats, rng);
                }
            }
            for t in 0..cfg.n_instances {
                for k in 0..cfg.n_factors {
                    sampler.update_factor(&x, &mut state, k, t, &mut stats, rng);
                }
            }
            x = draw_data(&state, floor, rng);
        }
        chain_rows.push(statistics(&state));
    }
    Ok(NAMES
        .iter()
        .enumerate()
        .map(|(j, &name)| {
            let (prior_mean, prior_se) = mean_and_se(&prior_rows, j);
            let (chain_mean, chain_se) = mean_and_se(&chain_rows, j);
            MomentComparison { name, prior_mean, prior_se, chain_mean, chain_se }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn short_run_agrees_with_the_prior() {
        let cfg = GewekeConfig { draws: 2_000, steps: 3, ..Default::default() };
        let report = geweke_test(&cfg, &mut rng_from_seed(9)).unwrap();
        assert_eq!(report.len(), 5);
        for m in &report {
            assert!(m.z_score().abs() < 4.0, "{}: z = {}", m.name, m.z_score());
        }
    }
}
