use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::density::floor_sigma;
use crate::model::{HyperParams, LayerPriors, WeightLayer};

/// Everything the single-layer sampler needs to know about the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerModel {
    pub priors: LayerPriors,
    pub sigma_top: f64,
    pub sigma_floor: f64,
    /// Stand-in for `K_+ / K` when proposing a factor from the empty state.
    pub empty_add_proposal: f64,
}

impl LayerModel {
    pub fn from_hyper(hyper: &HyperParams, layer: usize) -> Self {
        LayerModel {
            priors: hyper.layer(layer),
            sigma_top: hyper.sigma_top,
            sigma_floor: hyper.sigma_floor,
            empty_add_proposal: 1.0,
        }
    }
}

/// Fixed upper layers seen from the layer being sampled.
///
/// `weights` has one row per child factor (identified by `child_ids`) and one
/// column per parent factor; `factors` holds the parent values, one column per
/// instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentContext {
    pub weights: WeightLayer,
    pub factors: Array2<f64>,
    pub child_ids: Vec<u64>,
}

impl ParentContext {
    /// Prior standard deviations for the child factor with identifier `id`,
    /// or `None` when the parent layer has no row for it.
    pub fn sigma_row(&self, id: u64, sigma_floor: f64) -> Option<Vec<f64>> {
        let row = self.child_ids.iter().position(|&c| c == id)?;
        let w = self.weights.weight_row(row);
        Some(
            self.factors
                .columns()
                .into_iter()
                .map(|col| floor_sigma(w.iter().zip(col.iter()).map(|(a, b)| a * b).sum(), sigma_floor))
                .collect(),
        )
    }
}

/// Proposal and acceptance counts per move kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub add_proposed: u64,
    pub add_accepted: u64,
    pub delete_proposed: u64,
    pub delete_accepted: u64,
    pub weight_proposed: u64,
    pub weight_accepted: u64,
    pub factor_proposed: u64,
    pub factor_accepted: u64,
}

impl MoveStats {
    pub fn is_consistent(&self) -> bool {
        self.add_accepted <= self.add_proposed
            && self.delete_accepted <= self.delete_proposed
            && self.weight_accepted <= self.weight_proposed
            && self.factor_accepted <= self.factor_proposed
    }

    pub fn merge(&mut self, other: &MoveStats) {
        self.add_proposed += other.add_proposed;
        self.add_accepted += other.add_accepted;
        self.delete_proposed += other.delete_proposed;
        self.delete_accepted += other.delete_accepted;
        self.weight_proposed += other.weight_proposed;
        self.weight_accepted += other.weight_accepted;
        self.factor_proposed += other.factor_proposed;
        self.factor_accepted += other.factor_accepted;
    }
}

/// Sampler state for one layer: hidden factors `Y` (K x T), the weight layer
/// linking them to the layer below (N x K), and bookkeeping.
///
/// Masked-off slab entries are held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub(crate) factors: Array2<f64>,
    pub(crate) weights: WeightLayer,
    /// Prior standard deviation of every factor entry (K x T).
    pub(crate) prior_sigma: Array2<f64>,
    pub(crate) factor_ids: Vec<u64>,
    pub(crate) next_id: u64,
    /// Cached `W Y` (N x T).
    pub(crate) activation: Array2<f64>,
    pub(crate) log_joint_cached: f64,
}

impl ChainState {
    /// Builds a state and its activation cache. `prior_sigma` must match the
    /// shape of `factors`.
    pub fn new(weights: WeightLayer, factors: Array2<f64>, prior_sigma: Array2<f64>) -> Result<Self> {
        if weights.n_cols() != factors.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "{} weight columns but {} factor rows",
                weights.n_cols(),
                factors.nrows()
            )));
        }
        if prior_sigma.dim() != factors.dim() {
            return Err(Error::ShapeMismatch(format!(
                "prior sigma is {:?} but factors are {:?}",
                prior_sigma.dim(),
                factors.dim()
            )));
        }
        let mut weights = weights;
        for ((i, j), g) in weights.slab.indexed_iter_mut() {
            if !weights.mask.get(i, j) {
                *g = 0.0;
            }
        }
        let k = factors.nrows();
        let mut state = ChainState {
            activation: Array2::zeros((weights.n_rows(), factors.ncols())),
            factors,
            weights,
            prior_sigma,
            factor_ids: (0..k as u64).collect(),
            next_id: k as u64,
            log_joint_cached: f64::NAN,
        };
        state.refresh_activation();
        Ok(state)
    }

    /// A state whose factor priors are all `N(0, sigma^2)`.
    pub fn with_uniform_prior(weights: WeightLayer, factors: Array2<f64>, sigma: f64) -> Result<Self> {
        let prior = Array2::from_elem(factors.dim(), sigma);
        ChainState::new(weights, factors, prior)
    }

    pub fn num_factors(&self) -> usize {
        self.factors.nrows()
    }

    /// `K_+`: factors linked to at least one child unit.
    pub fn num_active(&self) -> usize {
        self.weights.mask.active_columns()
    }

    pub fn num_rows(&self) -> usize {
        self.weights.n_rows()
    }

    pub fn num_instances(&self) -> usize {
        self.factors.ncols()
    }

    pub fn factors(&self) -> &Array2<f64> {
        &self.factors
    }

    pub fn weights(&self) -> &WeightLayer {
        &self.weights
    }

    pub fn prior_sigma(&self) -> &Array2<f64> {
        &self.prior_sigma
    }

    pub fn factor_ids(&self) -> &[u64] {
        &self.factor_ids
    }

    pub fn activation(&self) -> &Array2<f64> {
        &self.activation
    }

    pub fn log_joint_cached(&self) -> f64 {
        self.log_joint_cached
    }

    pub(crate) fn refresh_activation(&mut self) {
        self.activation = self.weights.weights().dot(&self.factors);
    }

    /// Replaces the factor priors with those implied by `parent`; factors
    /// without a parent row fall back to `N(0, fallback^2)`.
    pub fn set_parent_context(&mut self, parent: Option<&ParentContext>, fallback: f64, sigma_floor: f64) {
        for (k, &id) in self.factor_ids.iter().enumerate() {
            let row = parent
                .and_then(|p| p.sigma_row(id, sigma_floor))
                .unwrap_or_else(|| vec![fallback; self.factors.ncols()]);
            self.prior_sigma.row_mut(k).assign(&ndarray::Array1::from(row));
        }
    }

    pub(crate) fn push_factor(&mut self, values: &[f64], sigma: f64) -> u64 {
        let t = self.factors.ncols();
        self.weights.mask.push_column(vec![false; self.weights.n_rows()]);
        self.weights
            .slab
            .push_column(ndarray::Array1::zeros(self.weights.n_rows()).view())
            .expect("row count matches");
        self.factors
            .push_row(ndarray::ArrayView1::from(values))
            .expect("instance count matches");
        self.prior_sigma
            .push_row(ndarray::Array1::from_elem(t, sigma).view())
            .expect("instance count matches");
        let id = self.next_id;
        self.next_id += 1;
        self.factor_ids.push(id);
        id
    }

    /// Removes factor `k` together with its weight column. The column must
    /// carry no links, so the activation cache is unaffected.
    pub(crate) fn remove_factor(&mut self, k: usize) {
        debug_assert_eq!(self.weights.mask.column_count(k), 0);
        self.weights.mask.remove_column(k);
        self.weights.slab.remove_index(Axis(1), k);
        self.factors.remove_index(Axis(0), k);
        self.prior_sigma.remove_index(Axis(0), k);
        self.factor_ids.remove(k);
    }

    /// Reorders factors so that new factor `j` is old factor `order[j]`.
    pub fn permute_factors(&self, order: &[usize]) -> ChainState {
        let pick_rows = |m: &Array2<f64>| m.select(Axis(0), order);
        let mut out = ChainState {
            factors: pick_rows(&self.factors),
            weights: self.weights.permute_columns(order),
            prior_sigma: pick_rows(&self.prior_sigma),
            factor_ids: order.iter().map(|&j| self.factor_ids[j]).collect(),
            next_id: self.next_id,
            activation: self.activation.clone(),
            log_joint_cached: self.log_joint_cached,
        };
        out.refresh_activation();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibp::BinaryMatrix;
    use ndarray::array;

    fn small() -> ChainState {
        let mask = BinaryMatrix::from_rows(&[[1u8, 0], [1, 1]]).unwrap();
        let w = WeightLayer::new(mask, array![[0.5, 9.0], [-1.0, 2.0]]).unwrap();
        ChainState::with_uniform_prior(w, array![[1.0, 2.0, 3.0], [0.0, 1.0, -1.0]], 1.0).unwrap()
    }

    #[test]
    fn masked_slab_is_zeroed_and_activation_cached() {
        let s = small();
        assert_eq!(s.weights().slab[[0, 1]], 0.0);
        assert_eq!(s.activation(), &array![[0.5, 1.0, 1.5], [-1.0, 0.0, -5.0]]);
        assert_eq!(s.num_factors(), 2);
        assert_eq!(s.num_active(), 2);
    }

    #[test]
    fn push_and_remove_factor() {
        let mut s = small();
        let id = s.push_factor(&[0.1, 0.2, 0.3], 1.0);
        assert_eq!(id, 2);
        assert_eq!(s.num_factors(), 3);
        assert_eq!(s.num_active(), 2);
        s.remove_factor(2);
        let base = small();
        assert_eq!(s.factors(), base.factors());
        assert_eq!(s.weights(), base.weights());
        assert_eq!(s.prior_sigma(), base.prior_sigma());
        assert_eq!(s.factor_ids(), base.factor_ids());
        assert_eq!(s.activation(), base.activation());
    }

    #[test]
    fn parent_context_sets_prior_rows() {
        let mut s = small();
        let pw = WeightLayer::new(BinaryMatrix::from_rows(&[[1u8]]).unwrap(), array![[2.0]]).unwrap();
        let parent = ParentContext {
            weights: pw,
            factors: array![[1.0, -3.0, 0.0]],
            child_ids: vec![1],
        };
        s.set_parent_context(Some(&parent), 1.0, 1e-6);
        assert_eq!(s.prior_sigma().row(0).to_vec(), vec![1.0, 1.0, 1.0]);
        assert_eq!(s.prior_sigma().row(1).to_vec(), vec![2.0, 6.0, 1e-6]);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let w = WeightLayer::empty(2);
        assert!(ChainState::with_uniform_prior(w, Array2::zeros((1, 3)), 1.0).is_err());
    }
}
