use std::collections::BTreeMap;

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::ibp::{harmonic_number, left_order_form, BinaryMatrix, LofClass};

/// Empirical frequency of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassFrequency {
    pub count: usize,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LofHistogram {
    pub draws: usize,
    pub classes: BTreeMap<LofClass, ClassFrequency>,
}

impl LofHistogram {
    /// Tallies classes; all-zero columns are dropped before classifying.
    pub fn from_draws(draws: impl IntoIterator<Item = BinaryMatrix>) -> Self {
        let mut counts: BTreeMap<LofClass, usize> = BTreeMap::new();
        let mut total = 0;
        for z in draws {
            *counts.entry(left_order_form(&drop_empty_columns(&z))).or_insert(0) += 1;
            total += 1;
        }
        let classes = counts
            .into_iter()
            .map(|(class, count)| {
                let f = count as f64 / total as f64;
                let freq = ClassFrequency {
                    count,
                    frequency: f,
                    std_error: (f * (1.0 - f) / total as f64).sqrt(),
                };
                (class, freq)
            })
            .collect();
        LofHistogram { draws: total, classes }
    }

    pub fn frequency(&self, class: &LofClass) -> f64 {
        self.classes.get(class).map_or(0.0, |c| c.frequency)
    }

    /// Total-variation distance between two empirical histograms.
    pub fn total_variation(&self, other: &LofHistogram) -> f64 {
        let mut keys: Vec<&LofClass> = self.classes.keys().collect();
        keys.extend(other.classes.keys().filter(|k| !self.classes.contains_key(*k)));
        0.5 * keys.iter().map(|k| (self.frequency(k) - other.frequency(k)).abs()).sum::<f64>()
    }
}

/// Draws `num_draws` matrices and tallies their left-ordered classes.
pub fn mc_lof_histogram<R, F>(mut sampler: F, num_draws: usize, rng: &mut R) -> Result<LofHistogram>
where
    F: FnMut(&mut R) -> Result<BinaryMatrix>,
{
    let draws = (0..num_draws).map(|_| sampler(rng)).collect::<Result<Vec<_>>>()?;
    Ok(LofHistogram::from_draws(draws))
}

pub fn drop_empty_columns(z: &BinaryMatrix) -> BinaryMatrix {
    let cols = z.columns().filter(|c| c.iter().any(|&b| b)).map(<[bool]>::to_vec).collect();
    BinaryMatrix::from_columns(z.n_rows(), cols).expect("same row count")
}

/// Number of columns whose first selected row is `n`, for each row: the
/// count of new dishes each customer took.
pub fn first_selection_counts(z: &BinaryMatrix) -> Vec<usize> {
    let mut counts = vec![0; z.n_rows()];
    for col in z.columns() {
        if let Some(first) = col.iter().position(|&b| b) {
            counts[first] += 1;
        }
    }
    counts
}

/// The class law with the factorial correction taken over first-selection
/// counts instead of equal-history groups. Kept for comparison only: it
/// does not normalize over classes.
pub fn logprob_mask_ibp_first_selection(z: &BinaryMatrix, alpha: f64) -> f64 {
    let n = z.n_rows();
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let columns: f64 = z
        .column_counts()
        .iter()
        .map(|&m| ln_gamma((n - m) as f64 + 1.0) + ln_gamma(m as f64) - ln_n_fact)
        .sum();
    let correction: f64 = first_selection_counts(z).iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum();
    z.n_cols() as f64 * alpha.ln() - correction - alpha * harmonic_number(n) + columns
}

/// Every class with at most `max_per_history` columns of each nonzero
/// history, for `n_rows` rows. Grows as `(max + 1)^(2^N - 1)`.
pub fn enumerate_lof_classes(n_rows: usize, max_per_history: usize) -> Vec<BinaryMatrix> {
    assert!(n_rows <= 3, "class enumeration is only practical for N <= 3");
    let histories: Vec<Vec<bool>> = (1u32..1 << n_rows)
        .map(|code| (0..n_rows).map(|i| code >> i & 1 == 1).collect())
        .collect();
    let mut out = Vec::new();
    let mut multiplicity = vec![0usize; histories.len()];
    loop {
        let cols = histories
            .iter()
            .zip(&multiplicity)
            .flat_map(|(h, &c)| std::iter::repeat_n(h.clone(), c))
            .collect();
        out.push(BinaryMatrix::from_columns(n_rows, cols).expect("same row count"));
        let mut pos = 0;
        loop {
            if pos == multiplicity.len() {
                return out;
            }
            multiplicity[pos] += 1;
            if multiplicity[pos] <= max_per_history {
                break;
            }
            multiplicity[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibp::{logprob_mask_ibp, sample_finite_mask, sample_ibp_sequential};
    use crate::rng::rng_from_seed;

    #[test]
    fn empty_and_normalized() {
        let mut rng = rng_from_seed(0);
        let h = mc_lof_histogram(|r| sample_ibp_sequential(2, 1.0, r), 0, &mut rng).unwrap();
        assert!(h.classes.is_empty());
        let h = mc_lof_histogram(|r| sample_ibp_sequential(2, 1.0, r), 500, &mut rng).unwrap();
        let total: f64 = h.classes.values().map(|c| c.frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_history_law_normalizes_and_first_selection_does_not() {
        let classes = enumerate_lof_classes(2, 12);
        let standard: f64 = classes.iter().map(|z| logprob_mask_ibp(z, 1.0).unwrap().exp()).sum();
        assert!((standard - 1.0).abs() < 1e-8, "{standard}");
        let alternative: f64 = classes.iter().map(|z| logprob_mask_ibp_first_selection(z, 1.0).exp()).sum();
        assert!((alternative - 1.0).abs() > 1e-3, "{alternative}");
    }

    #[test]
    fn first_selection_counting() {
        let z = BinaryMatrix::from_rows(&[[1u8, 0, 1, 0], [1, 1, 0, 0], [0, 1, 1, 1]]).unwrap();
        assert_eq!(first_selection_counts(&z), vec![2, 1, 1]);
    }

    #[test]
    fn finite_limit_approaches_the_ibp() {
        let mut rng = rng_from_seed(4);
        let seq = mc_lof_histogram(|r| sample_ibp_sequential(2, 1.0, r), 100_000, &mut rng).unwrap();
        let fin = mc_lof_histogram(|r| Ok(sample_finite_mask(2, 64, 1.0, r).0), 100_000, &mut rng).unwrap();
        let tv = seq.total_variation(&fin);
        assert!(tv < 0.02, "tv {tv}");
    }
}
