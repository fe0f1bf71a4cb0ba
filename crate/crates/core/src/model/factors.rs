use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Real matrix of factor values: rows are units (hidden factors or observed
/// dimensions), columns are instances.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix(Array2<f64>);

impl FactorMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({r},{c}) is {v}")));
        }
        Ok(FactorMatrix(values))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        FactorMatrix(Array2::zeros((rows, cols)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != t) {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} entries, expected {t}",
                rows[i].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(Array2::from_shape_vec((n, t), flat).expect("shape checked"))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.outer_iter().map(|r| r.to_vec()).collect()
    }
}

impl Serialize for FactorMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FactorMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        FactorMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
