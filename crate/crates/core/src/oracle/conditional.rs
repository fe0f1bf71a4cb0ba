//! Grid targets for the single-site kernels and a binned total-variation
//! comparison against kernel output.

use ndarray::Array2;
use rand::Rng;

use super::predictive::{marginal_weight_quadrature_on, slab_predictive_quadrature_on};
use super::quad::{default_nodes, half_line_nodes, Grid1D};
use crate::inference::{ChainState, LayerModel, LayerSampler, MoveStats};
use crate::model::density::{floor_sigma, normal_logpdf_sd};

/// A one-dimensional law with an optional atom at zero and a density
/// tabulated on a uniform grid; normalized so that
/// `atom + trapezoid(density) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTarget {
    pub atom: f64,
    pub grid: Grid1D,
    pub density: Vec<f64>,
}

impl ConditionalTarget {
    fn from_log(atom_log: Option<f64>, grid: Grid1D, log_density: Vec<f64>) -> Self {
        let max = log_density.iter().copied().chain(atom_log).fold(f64::NEG_INFINITY, f64::max);
        let mut density: Vec<f64> = log_density.iter().map(|l| (l - max).exp()).collect();
        let mut atom = atom_log.map_or(0.0, |l| (l - max).exp());
        let total = atom + super::quad::trapezoid(&density, grid.step());
        atom /= total;
        density.iter_mut().for_each(|d| *d /= total);
        ConditionalTarget { atom, grid, density }
    }

    /// Cumulative continuous mass at each grid point (trapezoid).
    fn cumulative(&self) -> Vec<f64> {
        let h = self.grid.step();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.density.len());
        out.push(0.0);
        for w in self.density.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Continuous-part bin edges at equal target mass, with the outer edges
    /// at infinity, and the mass of each bin.
    pub fn quantile_bins(&self, n_bins: usize) -> (Vec<f64>, Vec<f64>) {
        let cdf = self.cumulative();
        let total = *cdf.last().unwrap();
        let pts = self.grid.points();
        let mut edges = vec![f64::NEG_INFINITY];
        let mut j = 0;
        for b in 1..n_bins {
            let target = total * b as f64 / n_bins as f64;
            while cdf[j + 1] < target {
                j += 1;
            }
            // Linear interpolation inside the cell is within the trapezoid
            // rule's own error.
            let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
            edges.push(pts[j] + frac * self.grid.step());
        }
        edges.push(f64::INFINITY);
        (edges, vec![total / n_bins as f64; n_bins])
    }

    /// Binned total variation between the target and `samples`: an atom bin
    /// (exact zeros) when the target has an atom, plus `n_bins`
    /// equal-mass continuous bins.
    pub fn binned_tv(&self, samples: &[f64], n_bins: usize) -> f64 {
        let (edges, mass) = self.quantile_bins(n_bins);
        let mut counts = vec![0usize; n_bins];
        let mut zeros = 0usize;
        for &s in samples {
            if s == 0.0 && self.atom > 0.0 {
                zeros += 1;
                continue;
            }
            let b = edges.partition_point(|&e| e <= s).clamp(1, n_bins) - 1;
            counts[b] += 1;
        }
        let n = samples.len() as f64;
        let mut tv = (zeros as f64 / n - self.atom).abs();
        for (c, m) in counts.iter().zip(&mass) {
            tv += (*c as f64 / n - m).abs();
        }
        0.5 * tv
    }
}

fn row_rest(state: &ChainState, n: usize, k: usize) -> Vec<f64> {
    let mut w = state.weights().weight_row(n);
    w[k] = 0.0;
    let y = state.factors();
    (0..y.ncols()).map(|t| (0..w.len()).map(|j| w[j] * y[[j, t]]).sum()).collect()
}

/// Conditional law of `W[n,k]` given everything else, built from the
/// numerical prior predictive and the row's likelihood.
pub fn weight_conditional_target(
    x: &Array2<f64>,
    state: &ChainState,
    n: usize,
    k: usize,
    model: &LayerModel,
    half_width: f64,
    num_points: usize,
) -> ConditionalTarget {
    let unit = default_nodes();
    let half = half_line_nodes(&unit);
    let weights = state.weights();
    let others: Vec<f64> = (0..weights.n_rows())
        .filter(|&i| i != n && weights.mask.get(i, k))
        .map(|i| weights.slab[[i, k]])
        .collect();
    let p = model.priors;
    let a = p.alpha_ibp / weights.n_cols() as f64;
    let q = marginal_weight_quadrature_on(0.0, &others, weights.n_rows(), a, p.ig_shape, p.ig_scale, &unit, &half);
    let ln_slab = (1.0 - q.spike_mass).ln();

    let rest = row_rest(state, n, k);
    let y = state.factors().row(k).to_owned();
    let row_ll = |w: f64| -> f64 {
        rest.iter()
            .zip(y.iter())
            .enumerate()
            .map(|(t, (&r, &yv))| normal_logpdf_sd(x[[n, t]], floor_sigma(r + w * yv, model.sigma_floor)))
            .sum()
    };
    let grid = Grid1D::new(-half_width, half_width, num_points).expect("valid grid");
    let log_density = grid
        .points()
        .iter()
        .map(|&w| {
            ln_slab + slab_predictive_quadrature_on(w, &others, p.ig_shape, p.ig_scale, &half).ln() + row_ll(w)
        })
        .collect();
    ConditionalTarget::from_log(Some(q.spike_mass.ln() + row_ll(0.0)), grid, log_density)
}

/// Conditional law of `Y[k,t]` given everything else.
pub fn factor_conditional_target(
    x: &Array2<f64>,
    state: &ChainState,
    k: usize,
    t: usize,
    model: &LayerModel,
    half_width: f64,
    num_points: usize,
) -> ConditionalTarget {
    let w = state.weights().weights();
    let y = state.factors();
    let rest: Vec<f64> = (0..w.nrows())
        .map(|n| (0..w.ncols()).filter(|&j| j != k).map(|j| w[[n, j]] * y[[j, t]]).sum())
        .collect();
    let sigma = state.prior_sigma()[[k, t]];
    let grid = Grid1D::new(-half_width, half_width, num_points).expect("valid grid");
    let log_density = grid
        .points()
        .iter()
        .map(|&v| {
            normal_logpdf_sd(v, sigma)
                + (0..w.nrows())
                    .map(|n| normal_logpdf_sd(x[[n, t]], floor_sigma(rest[n] + w[[n, k]] * v, model.sigma_floor)))
                    .sum::<f64>()
        })
        .collect();
    ConditionalTarget::from_log(None, grid, log_density)
}

/// Repeatedly applies the weight kernel to `W[n,k]` of a frozen state,
/// keeping every `thin`-th value.
pub fn sample_weight_kernel<R: Rng + ?Sized>(
    x: &Array2<f64>,
    state: &ChainState,
    n: usize,
    k: usize,
    sampler: &LayerSampler,
    kept: usize,
    thin: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut s = state.clone();
    let mut stats = MoveStats::default();
    (0..kept)
        .map(|_| {
            for _ in 0..thin {
                sampler.update_weight(x, &mut s, n, k, &mut stats, rng);
            }
            s.weights().weight(n, k)
        })
        .collect()
}

/// As [`sample_weight_kernel`] for the factor kernel on `Y[k,t]`.
pub fn sample_factor_kernel<R: Rng + ?Sized>(
    x: &Array2<f64>,
    state: &ChainState,
    k: usize,
    t: usize,
    sampler: &LayerSampler,
    kept: usize,
    thin: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut s = state.clone();
    let mut stats = MoveStats::default();
    (0..kept)
        .map(|_| {
            for _ in 0..thin {
                sampler.update_factor(x, &mut s, k, t, &mut stats, rng);
            }
            s.factors()[[k, t]]
        })
        .collect()
}
