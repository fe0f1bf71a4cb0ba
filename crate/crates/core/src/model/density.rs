//! Scalar densities shared by generation, the joint, and the samplers.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Law of a single spike-and-slab weight evaluated at one point.
///
/// A zero weight carries probability *mass* (the spike); a nonzero weight
/// carries a *density* (the slab). The two live on different dominating
/// measures and are kept apart on purpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeSlabLaw {
    /// `1 - p`, the point mass at exactly zero.
    Atom { mass: f64 },
    /// `log p + log N(w; 0, sigma2)`.
    Density { log_density: f64 },
}

impl SpikeSlabLaw {
    pub fn mass(&self) -> Option<f64> {
        match *self {
            SpikeSlabLaw::Atom { mass } => Some(mass),
            SpikeSlabLaw::Density { .. } => None,
        }
    }

    pub fn log_density(&self) -> Option<f64> {
        match *self {
            SpikeSlabLaw::Atom { .. } => None,
            SpikeSlabLaw::Density { log_density } => Some(log_density),
        }
    }
}

/// Evaluates `|sgn w| p N(w; 0, sigma2) + (1 - p) delta_0(w)`.
pub fn spike_slab_logpdf(w: f64, p: f64, sigma2: f64) -> Result<SpikeSlabLaw> {
    if !w.is_finite() {
        return Err(Error::NonFinite(format!("weight {w}")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "slab variance must be positive, got {sigma2}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "inclusion probability must lie in [0, 1], got {p}"
        )));
    }
    if w == 0.0 {
        Ok(SpikeSlabLaw::Atom { mass: 1.0 - p })
    } else {
        Ok(SpikeSlabLaw::Density {
            log_density: p.ln() + normal_logpdf(w, sigma2),
        })
    }
}

/// `max(|sum_l w_l y_l|, floor)`: the standard deviation a child unit
/// inherits from its parents.
pub fn propagate_sigma(weight_row: &[f64], parent_factors: &[f64], sigma_floor: f64) -> Result<f64> {
    if weight_row.len() != parent_factors.len() {
        return Err(Error::ShapeMismatch(format!(
            "weight row has {} entries but parent has {} factors",
            weight_row.len(),
            parent_factors.len()
        )));
    }
    let activation: f64 = weight_row
        .iter()
        .zip(parent_factors)
        .map(|(w, y)| w * y)
        .sum();
    Ok(floor_sigma(activation, sigma_floor))
}

#[inline]
pub(crate) fn floor_sigma(activation: f64, sigma_floor: f64) -> f64 {
    activation.abs().max(sigma_floor)
}

#[inline]
pub fn normal_logpdf(x: f64, variance: f64) -> f64 {
    -0.5 * (LN_2PI + variance.ln() + x * x / variance)
}

/// Log-density of `N(0, s^2)` at `x`, parameterized by the standard
/// deviation. This is the per-cell observation term.
#[inline]
pub fn normal_logpdf_sd(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    -0.5 * (LN_2PI + z * z) - sd.ln()
}

/// Log-density of a zero-centred Student-t with `dof` degrees of freedom and
/// squared scale `scale2`.
pub fn student_t_logpdf(x: f64, dof: f64, scale2: f64) -> f64 {
    ln_gamma(0.5 * (dof + 1.0))
        - ln_gamma(0.5 * dof)
        - 0.5 * (dof * std::f64::consts::PI * scale2).ln()
        - 0.5 * (dof + 1.0) * (1.0 + x * x / (dof * scale2)).ln()
}

/// Log of `int prod_i N(g_i; 0, s2) IG(s2; shape, scale) ds2`, the joint
/// marginal of one column's slab values once the column variance is
/// integrated out (a multivariate Student-t).
pub fn slab_marginal_logpdf(values: &[f64], ig_shape: f64, ig_scale: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.len() as f64;
    let ss: f64 = values.iter().map(|g| g * g).sum();
    let post_shape = ig_shape + 0.5 * m;
    let post_scale = ig_scale + 0.5 * ss;
    ig_shape * ig_scale.ln() - ln_gamma(ig_shape) + ln_gamma(post_shape)
        - post_shape * post_scale.ln()
        - 0.5 * m * LN_2PI
}

/// Posterior-predictive law of one more slab value given the others in the
/// same column: Student-t with `2 a'` degrees of freedom and squared scale
/// `b' / a'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabPredictive {
    pub dof: f64,
    pub scale2: f64,
}

impl SlabPredictive {
    pub fn from_column(others: impl IntoIterator<Item = f64>, ig_shape: f64, ig_scale: f64) -> Self {
        let (count, ss) = others
            .into_iter()
            .fold((0usize, 0.0), |(c, s), g| (c + 1, s + g * g));
        Self::from_stats(count, ss, ig_shape, ig_scale)
    }

    pub fn from_stats(count: usize, sum_sq: f64, ig_shape: f64, ig_scale: f64) -> Self {
        let a = ig_shape + 0.5 * count as f64;
        let b = ig_scale + 0.5 * sum_sq;
        SlabPredictive {
            dof: 2.0 * a,
            scale2: b / a,
        }
    }

    pub fn logpdf(&self, x: f64) -> f64 {
        student_t_logpdf(x, self.dof, self.scale2)
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use rand_distr::{Distribution, StudentT};
        let t = StudentT::new(self.dof).expect("positive degrees of freedom");
        t.sample(rng) * self.scale2.sqrt()
    }
}

/// Poisson log-pmf.
pub fn poisson_logpmf(k: usize, rate: f64) -> f64 {
    let k = k as f64;
    if rate == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k * rate.ln() - rate - ln_gamma(k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_mass_reads_off_inclusion_probability() {
        assert_eq!(spike_slab_logpdf(0.0, 1.0, 1.0).unwrap(), SpikeSlabLaw::Atom { mass: 0.0 });
        let law = spike_slab_logpdf(0.0, 0.3, 2.0).unwrap();
        assert!((law.mass().unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn slab_density_at_one() {
        let law = spike_slab_logpdf(1.0, 0.5, 1.0).unwrap();
        let expected = 0.5f64.ln() - 0.5 - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((law.log_density().unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn spike_slab_rejects_bad_input() {
        assert!(matches!(spike_slab_logpdf(f64::NAN, 0.5, 1.0), Err(Error::NonFinite(_))));
        assert!(matches!(spike_slab_logpdf(f64::INFINITY, 0.5, 1.0), Err(Error::NonFinite(_))));
        assert!(spike_slab_logpdf(1.0, 0.5, 0.0).is_err());
        assert!(spike_slab_logpdf(1.0, 0.5, -1.0).is_err());
        assert!(spike_slab_logpdf(1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn propagate_sigma_examples() {
        assert_eq!(propagate_sigma(&[1.0, -2.0], &[3.0, 1.0], 1e-6).unwrap(), 1.0);
        assert_eq!(propagate_sigma(&[0.0, 0.0], &[5.0, 7.0], 1e-6).unwrap(), 1e-6);
        assert_eq!(propagate_sigma(&[], &[], 1e-6).unwrap(), 1e-6);
        assert!(matches!(
            propagate_sigma(&[1.0], &[1.0, 2.0], 1e-6),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn slab_marginal_chains_through_predictives() {
        // p(g1, g2, g3) = p(g1) p(g2 | g1) p(g3 | g1, g2)
        let g = [0.4, -1.3, 2.2];
        let (a, b) = (2.0, 1.0);
        let joint = slab_marginal_logpdf(&g, a, b);
        let mut chained = 0.0;
        for i in 0..g.len() {
            chained += SlabPredictive::from_column(g[..i].iter().copied(), a, b).logpdf(g[i]);
        }
        assert!((joint - chained).abs() < 1e-12);
    }

    #[test]
    fn poisson_pmf_small_cases() {
        assert!((poisson_logpmf(0, 2.0) + 2.0).abs() < 1e-15);
        assert!((poisson_logpmf(2, 2.0) - (2.0f64.ln() * 2.0 - 2.0 - 2.0f64.ln())).abs() < 1e-14);
        assert_eq!(poisson_logpmf(0, 0.0), 0.0);
    }
}
