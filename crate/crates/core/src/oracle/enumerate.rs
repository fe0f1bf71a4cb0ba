use crate::error::{Error, Result};
use crate::ibp::BinaryMatrix;

/// All `2^(N K)` binary `N x K` matrices, in counting order.
pub fn enumerate_masks(n_rows: usize, n_cols: usize) -> Result<Vec<BinaryMatrix>> {
    let bits = n_rows * n_cols;
    if bits > 12 {
        return Err(Error::InvalidParameter(format!(
            "{n_rows}x{n_cols} has {bits} cells; enumeration is limited to 12"
        )));
    }
    Ok((0u32..1 << bits)
        .map(|code| {
            let cols = (0..n_cols)
                .map(|k| (0..n_rows).map(|i| code >> (k * n_rows + i) & 1 == 1).collect())
                .collect();
            BinaryMatrix::from_columns(n_rows, cols).expect("consistent shape")
        })
        .collect())
}
