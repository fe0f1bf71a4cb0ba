use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary matrix stored column-major with cached column sums `m_k`.
///
/// Rows are child units (observed dimensions for the bottom layer), columns
/// are the factors they may select.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMatrix {
    n_rows: usize,
    columns: Vec<Vec<bool>>,
    counts: Vec<usize>,
}

impl BinaryMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        BinaryMatrix {
            n_rows,
            columns: vec![vec![false; n_rows]; n_cols],
            counts: vec![0; n_cols],
        }
    }

    pub fn from_columns(n_rows: usize, columns: Vec<Vec<bool>>) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| c.len() != n_rows) {
            return Err(Error::ShapeMismatch(format!(
                "column {bad} has {} entries, expected {n_rows}",
                columns[bad].len()
            )));
        }
        let counts = columns.iter().map(|c| c.iter().filter(|&&b| b).count()).collect();
        Ok(BinaryMatrix {
            n_rows,
            columns,
            counts,
        })
    }

    /// Builds from rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = BinaryMatrix::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            for (k, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, k, true),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "mask entry ({i},{k}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    /// Parses rows written as strings of `0`/`1` characters.
    pub fn from_row_strings<S: AsRef<str>>(n_cols: usize, rows: &[S]) -> Result<Self> {
        let mut m = BinaryMatrix::zeros(rows.len(), n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::ShapeMismatch(format!(
                    "mask row {i} has {} characters, expected {n_cols}",
                    row.len()
                )));
            }
            for (k, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(i, k, true),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "mask row {i} contains {other:?}"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col][row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let cell = &mut self.columns[col][row];
        if *cell != value {
            *cell = value;
            if value {
                self.counts[col] += 1;
            } else {
                self.counts[col] -= 1;
            }
        }
    }

    /// `m_k`, the number of rows selecting column `k`.
    #[inline]
    pub fn column_count(&self, col: usize) -> usize {
        self.counts[col]
    }

    /// `m_{-i,k}`: the column count with row `i` left out.
    #[inline]
    pub fn column_count_except(&self, row: usize, col: usize) -> usize {
        self.counts[col] - usize::from(self.columns[col][row])
    }

    pub fn column_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn column(&self, col: usize) -> &[bool] {
        &self.columns[col]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[bool]> {
        self.columns.iter().map(Vec::as_slice)
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    /// Number of columns with at least one selected row (`K_+`).
    pub fn active_columns(&self) -> usize {
        self.counts.iter().filter(|&&m| m > 0).count()
    }

    pub fn has_empty_column(&self) -> bool {
        self.counts.contains(&0)
    }

    pub fn push_column(&mut self, column: Vec<bool>) {
        assert_eq!(column.len(), self.n_rows, "column length must equal row count");
        self.counts.push(column.iter().filter(|&&b| b).count());
        self.columns.push(column);
    }

    pub fn remove_column(&mut self, col: usize) -> Vec<bool> {
        self.counts.remove(col);
        self.columns.remove(col)
    }

    pub fn push_zero_row(&mut self) {
        self.n_rows += 1;
        for c in &mut self.columns {
            c.push(false);
        }
    }

    pub fn remove_row(&mut self, row: usize) {
        self.n_rows -= 1;
        for (c, m) in self.columns.iter_mut().zip(&mut self.counts) {
            if c.remove(row) {
                *m -= 1;
            }
        }
    }

    /// Reorders columns so that new column `j` is old column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        BinaryMatrix {
            n_rows: self.n_rows,
            columns: order.iter().map(|&j| self.columns[j].clone()).collect(),
            counts: order.iter().map(|&j| self.counts[j]).collect(),
        }
    }

    /// Rows rendered as `0`/`1` strings, as used in JSON snapshots.
    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.n_rows)
            .map(|i| {
                self.columns
                    .iter()
                    .map(|c| if c[i] { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn counts_consistent(&self) -> bool {
        self.columns
            .iter()
            .zip(&self.counts)
            .all(|(c, &m)| c.iter().filter(|&&b| b).count() == m)
    }
}
