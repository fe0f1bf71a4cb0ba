//! Numerical prior predictive of a single weight entry.
//!
//! The posterior over the column parameters `(p, sigma2)` given the other
//! entries of the column is formed from the raw spike-and-slab law and the
//! Beta / inverse-gamma priors, normalized numerically, and integrated on a
//! tensor-product tanh-sinh grid. No conjugacy identity is used.

use statrs::function::gamma::ln_gamma;

use super::quad::{default_nodes, half_line_nodes, log_sum_exp, HalfLineNode, UnitNode};
use crate::model::density::normal_logpdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePredictive {
    /// `P(W = 0 | other entries)`.
    pub spike_mass: f64,
    /// Density of `W` at the queried nonzero value (0 when the query is 0).
    pub slab_density: f64,
}

/// Beta(`a`, 1) log-density.
fn ln_beta_a1(a: f64, node: &UnitNode) -> f64 {
    a.ln() + (a - 1.0) * node.ln_x
}

fn ln_inverse_gamma(shape: f64, scale: f64, node: &HalfLineNode) -> f64 {
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * node.ln_s - scale / node.s
}

/// Numerical prior predictive of `W[n,k]` given the nonzero values of the
/// other selected entries in the column (`others`) and the column height.
///
/// The column has `n_rows` entries; `others.len()` of the remaining
/// `n_rows - 1` are nonzero and the rest are zero.
pub fn marginal_weight_quadrature(
    w: f64,
    others: &[f64],
    n_rows: usize,
    alpha_over_k: f64,
    ig_shape: f64,
    ig_scale: f64,
) -> QuadraturePredictive {
    let unit = default_nodes();
    let half = half_line_nodes(&unit);
    marginal_weight_quadrature_on(w, others, n_rows, alpha_over_k, ig_shape, ig_scale, &unit, &half)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn marginal_weight_quadrature_on(
    w: f64,
    others: &[f64],
    n_rows: usize,
    alpha_over_k: f64,
    ig_shape: f64,
    ig_scale: f64,
    unit: &[UnitNode],
    half: &[HalfLineNode],
) -> QuadraturePredictive {
    assert!(others.len() < n_rows, "at most n_rows - 1 other entries can be nonzero");
    let zeros = (n_rows - 1 - others.len()) as f64;
    let m = others.len() as f64;

    // Each term is a log-integrand over (p, sigma2): prior times the law of
    // the other entries, times the query factor.
    let mut ln_norm = Vec::with_capacity(unit.len() * half.len());
    let mut ln_spike = Vec::with_capacity(unit.len() * half.len());
    let mut ln_slab = Vec::with_capacity(unit.len() * half.len());
    for s in half {
        let ln_sigma_part =
            ln_inverse_gamma(ig_shape, ig_scale, s) + others.iter().map(|&g| normal_logpdf(g, s.s)).sum::<f64>();
        let ln_query = if w != 0.0 { normal_logpdf(w, s.s) } else { f64::NEG_INFINITY };
        for p in unit {
            let ln_others = ln_beta_a1(alpha_over_k, p) + m * p.ln_x + zeros * p.ln_1mx + ln_sigma_part;
            let base = s.ln_weight + p.ln_weight + ln_others;
            ln_norm.push(base);
            ln_spike.push(base + p.ln_1mx);
            ln_slab.push(base + p.ln_x + ln_query);
        }
    }
    let z = log_sum_exp(ln_norm);
    QuadraturePredictive {
        spike_mass: (log_sum_exp(ln_spike) - z).exp(),
        slab_density: if w != 0.0 { (log_sum_exp(ln_slab) - z).exp() } else { 0.0 },
    }
}

/// Density of one more slab value given `others`, integrating the column
/// variance numerically (the inclusion probability is pinned to 1).
pub fn slab_predictive_quadrature(w: f64, others: &[f64], ig_shape: f64, ig_scale: f64) -> f64 {
    let half = half_line_nodes(&default_nodes());
    slab_predictive_quadrature_on(w, others, ig_shape, ig_scale, &half)
}

pub(crate) fn slab_predictive_quadrature_on(
    w: f64,
    others: &[f64],
    ig_shape: f64,
    ig_scale: f64,
    half: &[HalfLineNode],
) -> f64 {
    let mut ln_norm = Vec::with_capacity(half.len());
    let mut ln_num = Vec::with_capacity(half.len());
    for s in half {
        let base = s.ln_weight
            + ln_inverse_gamma(ig_shape, ig_scale, s)
            + others.iter().map(|&g| normal_logpdf(g, s.s)).sum::<f64>();
        ln_norm.push(base);
        ln_num.push(base + normal_logpdf(w, s.s));
    }
    (log_sum_exp(ln_num) - log_sum_exp(ln_norm)).exp()
}
