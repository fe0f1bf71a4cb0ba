use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::ibp::{sample_finite_mask, BinaryMatrix};

/// One layer of connections: binary mask `Z`, slab values `G`, and the
/// effective weights `W = Z ⊙ G`.
///
/// Rows index child units, columns index parent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLayer {
    pub mask: BinaryMatrix,
    pub slab: Array2<f64>,
    /// Per-column inclusion probabilities, when drawn explicitly.
    pub p_col: Option<Vec<f64>>,
    /// Per-column slab variances, when drawn explicitly.
    pub sigma2_col: Option<Vec<f64>>,
}

impl WeightLayer {
    pub fn new(mask: BinaryMatrix, slab: Array2<f64>) -> Result<Self> {
        if slab.dim() != (mask.n_rows(), mask.n_cols()) {
            return Err(Error::ShapeMismatch(format!(
                "mask is {}x{} but slab is {:?}",
                mask.n_rows(),
                mask.n_cols(),
                slab.dim()
            )));
        }
        Ok(WeightLayer {
            mask,
            slab,
            p_col: None,
            sigma2_col: None,
        })
    }

    pub fn empty(n_rows: usize) -> Self {
        WeightLayer::new(BinaryMatrix::zeros(n_rows, 0), Array2::zeros((n_rows, 0))).unwrap()
    }

    pub fn n_rows(&self) -> usize {
        self.mask.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.mask.n_cols()
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        if self.mask.get(row, col) {
            self.slab[[row, col]]
        } else {
            0.0
        }
    }

    /// Dense `W = Z ⊙ G`.
    pub fn weights(&self) -> Array2<f64> {
        Array2::from_shape_fn(self.slab.dim(), |(i, j)| self.weight(i, j))
    }

    pub fn weight_row(&self, row: usize) -> Vec<f64> {
        (0..self.n_cols()).map(|j| self.weight(row, j)).collect()
    }

    /// Slab values of the selected entries in column `col`.
    pub fn active_slab(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows())
            .filter(|&i| self.mask.get(i, col))
            .map(|i| self.slab[[i, col]])
            .collect()
    }

    /// Columns reordered so that new column `j` is old column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        let slab = Array2::from_shape_fn((self.n_rows(), order.len()), |(i, j)| self.slab[[i, order[j]]]);
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map(|v| order.iter().map(|&j| v[j]).collect());
        WeightLayer {
            mask: self.mask.permute_columns(order),
            slab,
            p_col: pick(&self.p_col),
            sigma2_col: pick(&self.sigma2_col),
        }
    }
}

/// Draws a weight layer from its prior: per column `p ~ Beta(alpha/K, 1)`,
/// mask entries `~ Bernoulli(p)`, `sigma2 ~ InverseGamma(shape, scale)` and
/// slab entries `~ N(0, sigma2)`.
pub fn sample_weight_layer<R: Rng + ?Sized>(
    n_rows: usize,
    n_cols: usize,
    alpha_ibp: f64,
    ig_shape: f64,
    ig_scale: f64,
    rng: &mut R,
) -> Result<WeightLayer> {
    for (name, v) in [("alpha_ibp", alpha_ibp), ("ig_shape", ig_shape), ("ig_scale", ig_scale)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let (mask, p_col) = sample_finite_mask(n_rows, n_cols, alpha_ibp, rng);
    let sigma2_col: Vec<f64> = (0..n_cols).map(|_| sample_inverse_gamma(ig_shape, ig_scale, rng)).collect();
    let mut slab = Array2::zeros((n_rows, n_cols));
    for (j, &s2) in sigma2_col.iter().enumerate() {
        let sd = s2.sqrt();
        for i in 0..n_rows {
            let z: f64 = StandardNormal.sample(rng);
            slab[[i, j]] = sd * z;
        }
    }
    Ok(WeightLayer {
        mask,
        slab,
        p_col: Some(p_col),
        sigma2_col: Some(sigma2_col),
    })
}

pub(crate) fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0 / scale).expect("positive parameters").sample(rng);
    1.0 / g
}
