use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ibp::harmonic_number;

/// Scalar priors and truncation controls for one model instance.
///
/// Per-layer lists are indexed from the bottom hidden layer upward
/// (`[0]` connects the observed data to the first hidden layer). A list of
/// length one applies to every layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    /// IBP / Beta concentration per layer.
    pub alpha_ibp_per_layer: Vec<f64>,
    /// Inverse-gamma shape of the slab variance per layer.
    pub ig_shape_per_layer: Vec<f64>,
    /// Inverse-gamma scale of the slab variance per layer.
    pub ig_scale_per_layer: Vec<f64>,
    /// Standard deviation of the topmost layer's factors.
    pub sigma_top: f64,
    /// Lower clamp on every propagated standard deviation.
    pub sigma_floor: f64,
    pub num_layers: usize,
    /// Hidden widths, bottom to top, used for forward generation.
    pub layer_widths: Vec<usize>,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha_ibp_per_layer: vec![3.0],
            ig_shape_per_layer: vec![2.0],
            ig_scale_per_layer: vec![1.0],
            sigma_top: 1.0,
            sigma_floor: 1e-6,
            num_layers: 1,
            layer_widths: vec![3],
        }
    }
}

/// Priors that govern a single weight layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerPriors {
    pub alpha_ibp: f64,
    pub ig_shape: f64,
    pub ig_scale: f64,
}

impl LayerPriors {
    /// Rate of the Poisson prior on the factor count for `n_rows` child units.
    pub fn factor_count_rate(&self, n_rows: usize) -> f64 {
        self.alpha_ibp * harmonic_number(n_rows)
    }
}

impl HyperParams {
    /// Single-layer parameters with the given widths and priors.
    pub fn single_layer(width: usize, alpha_ibp: f64, ig_shape: f64, ig_scale: f64) -> Self {
        HyperParams {
            alpha_ibp_per_layer: vec![alpha_ibp],
            ig_shape_per_layer: vec![ig_shape],
            ig_scale_per_layer: vec![ig_scale],
            layer_widths: vec![width],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.num_layers == 0 {
            return bad("num_layers must be at least 1".into());
        }
        if self.layer_widths.len() != self.num_layers {
            return bad(format!(
                "layer_widths has {} entries but num_layers is {}",
                self.layer_widths.len(),
                self.num_layers
            ));
        }
        for (name, list) in [
            ("alpha_ibp_per_layer", &self.alpha_ibp_per_layer),
            ("ig_shape_per_layer", &self.ig_shape_per_layer),
            ("ig_scale_per_layer", &self.ig_scale_per_layer),
        ] {
            if list.is_empty() || (list.len() != 1 && list.len() != self.num_layers) {
                return bad(format!(
                    "{name} must have 1 or {} entries, got {}",
                    self.num_layers,
                    list.len()
                ));
            }
            if let Some(v) = list.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return bad(format!("{name} entries must be positive, got {v}"));
            }
        }
        for (name, v) in [("sigma_top", self.sigma_top), ("sigma_floor", self.sigma_floor)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.sigma_floor > self.sigma_top {
            return bad(format!(
                "sigma_floor ({}) exceeds sigma_top ({})",
                self.sigma_floor, self.sigma_top
            ));
        }
        Ok(())
    }

    /// Priors for weight layer `layer` (0 = observed-to-first-hidden).
    /// Layers past the end of a list reuse its last entry.
    pub fn layer(&self, layer: usize) -> LayerPriors {
        let pick = |v: &[f64]| v[layer.min(v.len() - 1)];
        LayerPriors {
            alpha_ibp: pick(&self.alpha_ibp_per_layer),
            ig_shape: pick(&self.ig_shape_per_layer),
            ig_scale: pick(&self.ig_scale_per_layer),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        HyperParams::default().validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut h = HyperParams::default();
        h.sigma_floor = 2.0;
        assert!(h.validate().is_err());
        let mut h = HyperParams::default();
        h.num_layers = 2;
        assert!(h.validate().is_err());
        h.layer_widths = vec![3, 2];
        h.validate().unwrap();
        h.ig_shape_per_layer = vec![2.0, 2.0, 2.0];
        assert!(h.validate().is_err());
        let mut h = HyperParams::default();
        h.alpha_ibp_per_layer = vec![0.0];
        assert!(h.validate().is_err());
    }

    #[test]
    fn layer_lookup_clamps() {
        let mut h = HyperParams::default();
        h.alpha_ibp_per_layer = vec![3.0, 1.5];
        assert_eq!(h.layer(0).alpha_ibp, 3.0);
        assert_eq!(h.layer(1).alpha_ibp, 1.5);
        assert_eq!(h.layer(4).alpha_ibp, 1.5);
        assert_eq!(h.layer(4).ig_shape, 2.0);
    }
}
