use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::density::floor_sigma;
use super::{sample_weight_layer, FactorMatrix, HyperParams, WeightLayer};
use crate::error::{Error, Result};

/// A finite truncation of the hierarchical model: weight layers ordered from
/// the top of the hierarchy down to the observed layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeModel {
    pub hyper: HyperParams,
    /// `layers[0]` connects the two topmost layers; the last entry has one
    /// row per observed dimension.
    pub layers: Vec<WeightLayer>,
}

impl GenerativeModel {
    pub fn new(hyper: HyperParams, layers: Vec<WeightLayer>) -> Result<Self> {
        hyper.validate()?;
        if layers.len() != hyper.num_layers {
            return Err(Error::ShapeMismatch(format!(
                "{} weight layers for num_layers = {}",
                layers.len(),
                hyper.num_layers
            )));
        }
        for pair in layers.windows(2) {
            if pair[0].n_rows() != pair[1].n_cols() {
                return Err(Error::ShapeMismatch(format!(
                    "layer with {} child rows feeds a layer with {} parent columns",
                    pair[0].n_rows(),
                    pair[1].n_cols()
                )));
            }
        }
        Ok(GenerativeModel { hyper, layers })
    }

    /// Draws every weight layer from its prior for `n_observed` visible
    /// dimensions and the widths in `hyper.layer_widths`.
    pub fn sample<R: Rng + ?Sized>(hyper: HyperParams, n_observed: usize, rng: &mut R) -> Result<Self> {
        hyper.validate()?;
        let depth = hyper.num_layers;
        let mut layers = Vec::with_capacity(depth);
        for layer in (0..depth).rev() {
            let rows = if layer == 0 { n_observed } else { hyper.layer_widths[layer - 1] };
            let cols = hyper.layer_widths[layer];
            let p = hyper.layer(layer);
            layers.push(sample_weight_layer(rows, cols, p.alpha_ibp, p.ig_shape, p.ig_scale, rng)?);
        }
        GenerativeModel::new(hyper, layers)
    }

    /// As [`GenerativeModel::sample`], conditioned on every factor having at
    /// least one link: each all-zero column is redrawn (inclusion
    /// probability, mask and slab) from its prior until it has a link.
    pub fn sample_linked<R: Rng + ?Sized>(hyper: HyperParams, n_observed: usize, rng: &mut R) -> Result<Self> {
        let mut model = GenerativeModel::sample(hyper, n_observed, rng)?;
        let depth = model.layers.len();
        for (pos, layer) in model.layers.iter_mut().enumerate() {
            let p = model.hyper.layer(depth - 1 - pos);
            let a = p.alpha_ibp / layer.n_cols().max(1) as f64;
            for k in 0..layer.n_cols() {
                while layer.mask.column_count(k) == 0 {
                    let fresh = sample_weight_layer(layer.n_rows(), 1, a, p.ig_shape, p.ig_scale, rng)?;
                    for i in 0..layer.n_rows() {
                        layer.mask.set(i, k, fresh.mask.get(i, 0));
                        layer.slab[[i, k]] = fresh.slab[[i, 0]];
                    }
                    if let (Some(pc), Some(fp)) = (layer.p_col.as_mut(), fresh.p_col.as_ref()) {
                        pc[k] = fp[0];
                    }
                    if let (Some(sc), Some(fs)) = (layer.sigma2_col.as_mut(), fresh.sigma2_col.as_ref()) {
                        sc[k] = fs[0];
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn observed_dim(&self) -> usize {
        self.layers.last().map_or(0, WeightLayer::n_rows)
    }

    /// Widths of the hidden layers, top to bottom.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers.iter().map(WeightLayer::n_cols).collect()
    }

    /// Weight layer that feeds hidden layer `layer` (0 = first hidden layer)
    /// into its children.
    pub fn bottom_up(&self, layer: usize) -> &WeightLayer {
        &self.layers[self.layers.len() - 1 - layer]
    }
}

/// Draws the child units of one instance given its parents:
/// each child `~ N(0, propagate_sigma(row, parent)^2)`.
pub fn sample_factor_column<R: Rng + ?Sized>(
    parent_weights: &WeightLayer,
    parent_factors: &[f64],
    sigma_floor: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if parent_factors.len() != parent_weights.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} parent factors for a layer with {} columns",
            parent_factors.len(),
            parent_weights.n_cols()
        )));
    }
    Ok((0..parent_weights.n_rows())
        .map(|i| {
            let activation: f64 = (0..parent_weights.n_cols())
                .map(|j| parent_weights.weight(i, j) * parent_factors[j])
                .sum();
            let z: f64 = StandardNormal.sample(rng);
            floor_sigma(activation, sigma_floor) * z
        })
        .collect())
}

/// Forward-samples `t` independent instances through fixed weights.
///
/// Returns one matrix per layer from the top hidden layer down to the
/// observed data (last element).
pub fn generate_dataset<R: Rng + ?Sized>(model: &GenerativeModel, t: usize, rng: &mut R) -> Result<Vec<FactorMatrix>> {
    let hyper = &model.hyper;
    let top_width = model.layers.first().map_or(0, WeightLayer::n_cols);
    let mut top = Array2::zeros((top_width, t));
    for v in top.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = hyper.sigma_top * z;
    }
    let mut out = vec![FactorMatrix::new(top)?];
    for layer in &model.layers {
        let parent = out.last().expect("top layer present").values().clone();
        let mut child = Array2::zeros((layer.n_rows(), t));
        for col in 0..t {
            let parent_col = parent.column(col).to_vec();
            let drawn = sample_factor_column(layer, &parent_col, hyper.sigma_floor, rng)?;
            child.column_mut(col).assign(&ndarray::Array1::from(drawn));
        }
        out.push(FactorMatrix::new(child)?);
    }
    Ok(out)
}
