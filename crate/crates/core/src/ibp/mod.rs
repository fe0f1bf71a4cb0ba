//! Beta-Bernoulli masks and their Indian Buffet Process limit.

mod binary;
mod lof;

pub use binary::BinaryMatrix;
pub use lof::{left_order_form, LofClass};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `H_n = sum_{j=1}^n 1/j`, with `H_0 = 0`.
pub fn harmonic_number(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `log P(Z | p) = sum_k m_k log p_k + (N - m_k) log(1 - p_k)`.
pub fn logprob_mask_given_p(z: &BinaryMatrix, p: &[f64]) -> Result<f64> {
    if p.len() != z.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} probabilities for {} columns",
            p.len(),
            z.n_cols()
        )));
    }
    if let Some(bad) = p.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::InvalidParameter(format!("probability {bad} outside [0, 1]")));
    }
    let n = z.n_rows() as f64;
    Ok(z
        .column_counts()
        .iter()
        .zip(p)
        .map(|(&m, &pk)| {
            let m = m as f64;
            xlogy(m, pk) + xlogy(n - m, 1.0 - pk)
        })
        .sum())
}

/// Log-probability of one column with `m` ones out of `n` rows under the
/// finite Beta(`a`, 1)-Bernoulli model with `p` integrated out.
#[inline]
pub fn log_column_marginal(m: usize, n: usize, a: f64) -> f64 {
    a.ln() + ln_gamma(m as f64 + a) + ln_gamma((n - m) as f64 + 1.0) - ln_gamma(n as f64 + 1.0 + a)
}

/// Mask log-probability with each `p_k ~ Beta(alpha / K, 1)` integrated out.
pub fn logprob_mask_marginal(z: &BinaryMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let k = z.n_cols();
    if k == 0 {
        return Ok(0.0);
    }
    let a = alpha / k as f64;
    let n = z.n_rows();
    Ok(z.column_counts().iter().map(|&m| log_column_marginal(m, n, a)).sum())
}

/// Log-probability of the left-ordered equivalence class of `z` under the
/// one-parameter IBP.
///
/// The factorial correction groups columns with identical histories. `z`
/// must contain active columns only.
pub fn logprob_mask_ibp(z: &BinaryMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if z.has_empty_column() {
        return Err(Error::InvalidParameter(
            "all-zero column present; prune inactive columns first".into(),
        ));
    }
    let n = z.n_rows();
    let k_plus = z.n_cols() as f64;
    let lof = left_order_form(z);
    let multiplicity_term: f64 = lof
        .history_multiplicities()
        .values()
        .map(|&c| ln_gamma(c as f64 + 1.0))
        .sum();
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let column_term: f64 = z
        .column_counts()
        .iter()
        .map(|&m| ln_gamma((n - m) as f64 + 1.0) + ln_gamma(m as f64) - ln_n_fact)
        .sum();
    Ok(k_plus * alpha.ln() - multiplicity_term - alpha * harmonic_number(n) + column_term)
}

/// Sequential culinary-process draw: customer `i` takes each existing dish
/// with probability `m_k / i`, then `Poisson(alpha / i)` new ones.
pub fn sample_ibp_sequential<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<BinaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one customer".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let mut z = BinaryMatrix::zeros(n, 0);
    for i in 0..n {
        let customer = (i + 1) as f64;
        for k in 0..z.n_cols() {
            let m = z.column_count(k) as f64;
            if rng.random::<f64>() < m / customer {
                z.set(i, k, true);
            }
        }
        let new_dishes = draw_poisson(alpha / customer, rng);
        for _ in 0..new_dishes {
            let mut col = vec![false; n];
            col[i] = true;
            z.push_column(col);
        }
    }
    Ok(z)
}

pub(crate) fn draw_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as usize
}

/// Draws `p_k ~ Beta(a, 1)` as `U^(1/a)`, which stays exact for small `a`.
pub(crate) fn sample_beta_a1<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    u.powf(1.0 / a)
}

/// Finite Beta-Bernoulli mask: `p_k ~ Beta(alpha / K, 1)`, `Z_{n,k} ~ Bern(p_k)`.
/// Returns the mask and the per-column probabilities.
pub fn sample_finite_mask<R: Rng + ?Sized>(
    n_rows: usize,
    n_cols: usize,
    alpha: f64,
    rng: &mut R,
) -> (BinaryMatrix, Vec<f64>) {
    let a = alpha / n_cols.max(1) as f64;
    let mut z = BinaryMatrix::zeros(n_rows, n_cols);
    let mut ps = Vec::with_capacity(n_cols);
    for k in 0..n_cols {
        let p = sample_beta_a1(a, rng);
        for i in 0..n_rows {
            if rng.random::<f64>() < p {
                z.set(i, k, true);
            }
        }
        ps.push(p);
    }
    (z, ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic_number(0), 0.0);
        assert_eq!(harmonic_number(1), 1.0);
        assert!((harmonic_number(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mask_given_p_examples() {
        let z = BinaryMatrix::zeros(2, 1);
        assert!((logprob_mask_given_p(&z, &[0.5]).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        let full = BinaryMatrix::from_rows(&[[1u8, 1], [1, 1]]).unwrap();
        assert_eq!(logprob_mask_given_p(&full, &[1.0, 1.0]).unwrap(), 0.0);
        assert!(logprob_mask_given_p(&z, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn two_by_one_marginals() {
        // Exhaustive table for N=2, K=1, alpha=1: 1/3, 1/6, 1/6, 1/3.
        let zero = BinaryMatrix::from_rows(&[[0u8], [0]]).unwrap();
        let one = BinaryMatrix::from_rows(&[[1u8], [0]]).unwrap();
        let two = BinaryMatrix::from_rows(&[[1u8], [1]]).unwrap();
        let lp = |z: &BinaryMatrix| logprob_mask_marginal(z, 1.0).unwrap().exp();
        assert!((lp(&zero) - 1.0 / 3.0).abs() < 1e-14);
        assert!((lp(&one) - 1.0 / 6.0).abs() < 1e-14);
        assert!((lp(&two) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn ibp_small_cases() {
        let empty = BinaryMatrix::zeros(3, 0);
        let lp = logprob_mask_ibp(&empty, 2.0).unwrap();
        assert!((lp + 2.0 * 11.0 / 6.0).abs() < 1e-14);
        let single = BinaryMatrix::from_rows(&[[1u8]]).unwrap();
        assert!((logprob_mask_ibp(&single, 1.0).unwrap() + 1.0).abs() < 1e-14);
        let with_empty = BinaryMatrix::from_rows(&[[1u8, 0]]).unwrap();
        assert!(logprob_mask_ibp(&with_empty, 1.0).is_err());
    }

    #[test]
    fn one_row_ibp_is_poisson() {
        // With N=1 every class is j copies of history "1": Poisson(alpha).
        let alpha = 1.7;
        for j in 0..6usize {
            let z = BinaryMatrix::from_rows(&[vec![1u8; j]]).unwrap();
            let z = if j == 0 { BinaryMatrix::zeros(1, 0) } else { z };
            let expected = crate::model::poisson_logpmf(j, alpha);
            assert!((logprob_mask_ibp(&z, alpha).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ibp_is_permutation_invariant() {
        let z = BinaryMatrix::from_rows(&[[1u8, 0, 1], [1, 1, 1], [0, 1, 1]]).unwrap();
        let base = logprob_mask_ibp(&z, 1.3).unwrap();
        for order in [[2, 1, 0], [1, 2, 0], [0, 2, 1]] {
            let p = logprob_mask_ibp(&z.permute_columns(&order), 1.3).unwrap();
            assert!((p - base).abs() < 1e-13);
        }
    }

    #[test]
    fn sequential_sampler_never_emits_empty_columns() {
        let mut rng = rng_from_seed(11);
        for _ in 0..500 {
            let z = sample_ibp_sequential(6, 2.5, &mut rng).unwrap();
            assert!(!z.has_empty_column());
        }
    }

    #[test]
    fn tiny_alpha_gives_no_columns() {
        let mut rng = rng_from_seed(3);
        let total: usize = (0..1000)
            .map(|_| sample_ibp_sequential(5, 1e-9, &mut rng).unwrap().n_cols())
            .sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn first_customer_dish_count_is_poisson_alpha() {
        let mut rng = rng_from_seed(5);
        let alpha = 2.0;
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let z = sample_ibp_sequential(1, alpha, &mut rng).unwrap();
            sum += z.n_cols() as f64;
        }
        let mean = sum / draws as f64;
        let se = (alpha / draws as f64).sqrt();
        assert!((mean - alpha).abs() < 3.0 * se, "mean {mean}");
    }
}
