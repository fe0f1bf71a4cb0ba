use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BinaryMatrix;

/// Equivalence class of a binary matrix under column permutation,
/// represented by its left-ordered form.
///
/// Columns are sorted by their binary history (row 0 is the most significant
/// bit), largest first; all-zero columns therefore sort last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LofClass {
    canonical: Vec<Vec<bool>>,
    n_rows: usize,
}

impl LofClass {
    pub fn canonical(&self) -> BinaryMatrix {
        BinaryMatrix::from_columns(self.n_rows, self.canonical.clone())
            .expect("canonical columns share the row count")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.canonical.len()
    }

    /// `K_h` for every nonzero history `h` present: the number of columns
    /// sharing that exact history.
    pub fn history_multiplicities(&self) -> BTreeMap<Vec<bool>, usize> {
        let mut out = BTreeMap::new();
        for col in self.canonical.iter().filter(|c| c.iter().any(|&b| b)) {
            *out.entry(col.clone()).or_insert(0) += 1;
        }
        out
    }
}

pub fn left_order_form(z: &BinaryMatrix) -> LofClass {
    let mut cols: Vec<Vec<bool>> = z.columns().map(<[bool]>::to_vec).collect();
    // `bool` orders false < true, so lexicographic order over rows is the
    // binary-number order with row 0 as the leading bit.
    cols.sort_unstable_by(|a, b| b.cmp(a));
    LofClass {
        canonical: cols,
        n_rows: z.n_rows(),
    }
}
