//! File formats: matrices and traces as CSV, sidecars and snapshots as JSON.
//! Every writer goes through a temporary file in the target directory that
//! is renamed into place, so a crash never leaves a truncated file behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::inference::{ChainState, TraceRow};
use crate::model::{FactorMatrix, HyperParams, WeightLayer};

/// Writes `path` atomically with the bytes produced by `fill`.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Writes rows as CSV records with a `t0,t1,...` header.
pub fn write_matrix_csv(path: &Path, m: &FactorMatrix) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record((0..m.cols()).map(|t| format!("t{t}")))?;
        for row in m.values().rows() {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    })
}

/// Reads a matrix written by [`write_matrix_csv`]. Errors name the file line.
pub fn read_matrix_csv(path: &Path) -> Result<FactorMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let width = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.len();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", record.len())));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line, format!("field {} is not a number: {field:?}", j + 1)))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(line, format!("field {} is not finite", j + 1)))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() && width > 0 {
        return Err(parse_err(1, "no data rows".into()));
    }
    FactorMatrix::from_rows(&rows)
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        if trace.is_empty() {
            out.write_record(["iteration", "K", "log_joint", "accepted_adds", "accepted_deletes"])?;
        }
        for row in trace {
            out.serialize(row)?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    })
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{other:?}")),
    })?;
    reader
        .deserialize()
        .map(|r: std::result::Result<TraceRow, csv::Error>| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })
        })
        .collect()
}

/// A weight layer as text-friendly arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSnapshot {
    /// One `0`/`1` string per row.
    pub mask: Vec<String>,
    pub slab: Vec<Vec<f64>>,
}

impl From<&WeightLayer> for WeightSnapshot {
    fn from(w: &WeightLayer) -> Self {
        WeightSnapshot {
            mask: w.mask.to_row_strings(),
            slab: w.weights().outer_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl WeightSnapshot {
    pub fn to_layer(&self) -> Result<WeightLayer> {
        let cols = self.slab.first().map_or(0, Vec::len);
        let mask = crate::ibp::BinaryMatrix::from_row_strings(cols, &self.mask)?;
        let slab = FactorMatrix::from_rows(&self.slab)?.into_inner();
        let slab = if self.slab.is_empty() { ndarray::Array2::zeros((0, cols)) } else { slab };
        WeightLayer::new(mask, slab)
    }
}

/// Ground truth written next to a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    /// `[N, T]` of the observed matrix.
    pub shape: [usize; 2],
    pub seed: u64,
    pub hyper: HyperParams,
    /// Linked factors per hidden layer, top layer first.
    pub true_k: Vec<usize>,
    /// Width of each hidden layer as generated, top layer first.
    pub layer_widths: Vec<usize>,
    /// Weight layers, top first; the last one feeds the observed data.
    pub weights: Vec<WeightSnapshot>,
    /// Hidden factor matrices, top first.
    pub factors: Vec<FactorMatrix>,
}

/// Final sampler state for one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub layer: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub k_plus: usize,
    pub log_joint: f64,
    pub weights: WeightSnapshot,
    pub factors: Vec<Vec<f64>>,
}

impl From<(usize, &ChainState)> for StateSnapshot {
    fn from((layer, s): (usize, &ChainState)) -> Self {
        StateSnapshot {
            layer,
            k: s.num_factors(),
            k_plus: s.num_active(),
            log_joint: s.log_joint_cached(),
            weights: s.weights().into(),
            factors: s.factors().outer_iter().map(|r| r.to_vec()).collect(),
        }
    }
}
