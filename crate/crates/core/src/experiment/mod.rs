//! The factor-recovery sweep: for each true factor count, one synthetic
//! dataset, several initialization strategies, and repeated chains.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{run_mh_layer, InferenceConfig, InitStrategy, LayerModel, TraceRow};
use crate::io::{write_atomic, write_json, write_trace_csv};
use crate::model::{generate_dataset, FactorMatrix, GenerativeModel, HyperParams};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_observed: usize,
    pub n_instances: usize,
    pub k_true: Vec<usize>,
    pub inits: Vec<InitStrategy>,
    pub iterations: usize,
    pub replicates: usize,
    /// Leading fraction of each trace discarded by the estimator.
    pub burn_in: f64,
    pub base_seed: u64,
    /// Condition generated datasets on every true factor having a link, so
    /// that the true count is the number of factors the data depend on.
    pub linked_factors: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_observed: 16,
            n_instances: 200,
            k_true: (3..=10).collect(),
            inits: vec![
                InitStrategy::Fixed(2),
                InitStrategy::Fixed(10),
                InitStrategy::Uniform { lo: 3, hi: 10 },
            ],
            iterations: 200,
            replicates: 10,
            burn_in: 0.5,
            base_seed: 0,
            linked_factors: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.k_true.is_empty() {
            return Err(Error::InvalidParameter("k_true must not be empty".into()));
        }
        if self.inits.is_empty() {
            return Err(Error::InvalidParameter("at least one init strategy is required".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidParameter(format!("burn_in must lie in [0, 1), got {}", self.burn_in)));
        }
        if self.iterations == 0 || self.n_observed == 0 {
            return Err(Error::InvalidParameter("iterations and n_observed must be positive".into()));
        }
        Ok(())
    }

    /// Seed of the dataset for `k_true`.
    pub fn dataset_seed(&self, k_true: usize) -> u64 {
        self.base_seed.wrapping_add(k_true as u64)
    }

    /// Seed of one chain, a function of the cell identity only.
    pub fn trial_seed(&self, k_true: usize, init_index: usize, replicate: usize) -> u64 {
        derive_seed(self.base_seed, &[k_true as u64, init_index as u64, replicate as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub k_true: usize,
    pub init: InitStrategy,
    pub init_index: usize,
    pub replicate: usize,
    pub seed: u64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    /// Mean of `K` over the post-burn-in iterations.
    pub k_hat: f64,
    pub seconds: f64,
}

impl TrialResult {
    pub fn k_trace(&self) -> Vec<usize> {
        self.trace.iter().map(|r| r.k).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub k_true: usize,
    pub init: String,
    pub mean: f64,
    /// Unbiased sample variance of the per-replicate estimates.
    pub variance: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryStats {
    pub cells: Vec<CellSummary>,
}

impl SummaryStats {
    pub fn cell(&self, k_true: usize, init: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.k_true == k_true && c.init == init)
    }

    /// Mean estimate for `k_true` pooled over every init strategy.
    pub fn pooled_mean(&self, k_true: usize) -> Option<f64> {
        let cells: Vec<_> = self.cells.iter().filter(|c| c.k_true == k_true).collect();
        let n: usize = cells.iter().map(|c| c.replicates).sum();
        (n > 0).then(|| cells.iter().map(|c| c.mean * c.replicates as f64).sum::<f64>() / n as f64)
    }
}

/// Mean of the trace after discarding the leading `burn_in` fraction (at
/// least the last entry is always kept).
pub fn point_estimate(k_trace: &[usize], burn_in: f64) -> f64 {
    if k_trace.is_empty() {
        return 0.0;
    }
    let start = ((k_trace.len() as f64 * burn_in).floor() as usize).min(k_trace.len() - 1);
    let tail = &k_trace[start..];
    tail.iter().sum::<usize>() as f64 / tail.len() as f64
}

/// The dataset for one true factor count: the generating model and every
/// layer's matrix, observed data last.
pub fn experiment_dataset(
    cfg: &ExperimentConfig,
    hyper: &HyperParams,
    k_true: usize,
) -> Result<(GenerativeModel, Vec<FactorMatrix>)> {
    let hyper = HyperParams {
        num_layers: 1,
        layer_widths: vec![k_true],
        ..hyper.clone()
    };
    let mut rng = rng_from_seed(cfg.dataset_seed(k_true));
    let model = if cfg.linked_factors {
        GenerativeModel::sample_linked(hyper, cfg.n_observed, &mut rng)?
    } else {
        GenerativeModel::sample(hyper, cfg.n_observed, &mut rng)?
    };
    let layers = generate_dataset(&model, cfg.n_instances, &mut rng)?;
    Ok((model, layers))
}

/// Runs every (true count, init, replicate) chain on a pool of `jobs`
/// threads. Results come back in cell order whatever the scheduling.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    hyper: &HyperParams,
    inference: &InferenceConfig,
    jobs: usize,
) -> Result<(Vec<TrialResult>, SummaryStats)> {
    cfg.validate()?;
    hyper.validate()?;
    let mut datasets = BTreeMap::new();
    for &k in &cfg.k_true {
        datasets.insert(k, experiment_dataset(cfg, hyper, k)?.1.pop().expect("observed layer"));
    }
    let model = LayerModel::from_hyper(hyper, 0);
    let cells: Vec<(usize, usize, usize)> = cfg
        .k_true
        .iter()
        .flat_map(|&k| (0..cfg.inits.len()).flat_map(move |i| (0..cfg.replicates).map(move |r| (k, i, r))))
        .collect();
    let run_cell = |&(k_true, init_index, replicate): &(usize, usize, usize)| -> Result<TrialResult> {
        let seed = cfg.trial_seed(k_true, init_index, replicate);
        let icfg = InferenceConfig {
            iterations: cfg.iterations,
            init_k: cfg.inits[init_index],
            seed,
            ..inference.clone()
        };
        let start = Instant::now();
        let run = run_mh_layer(&datasets[&k_true], &icfg, &model, None)?;
        let k_hat = point_estimate(&run.k_trace(), cfg.burn_in);
        Ok(TrialResult {
            k_true,
            init: cfg.inits[init_index],
            init_index,
            replicate,
            seed,
            trace: run.trace,
            k_hat,
            seconds: start.elapsed().as_secs_f64(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results = pool.install(|| cells.par_iter().map(run_cell).collect::<Result<Vec<_>>>())?;
    let stats = summarize(&results);
    Ok((results, stats))
}

/// Sample mean and unbiased variance of `k_hat` per (true count, init),
/// ordered by true count then by first appearance of the init.
pub fn summarize(results: &[TrialResult]) -> SummaryStats {
    let mut groups: BTreeMap<(usize, usize), (String, Vec<f64>)> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.k_true, r.init_index))
            .or_insert_with(|| (r.init.label(), Vec::new()))
            .1
            .push(r.k_hat);
    }
    let cells = groups
        .into_iter()
        .map(|((k_true, _), (init, v))| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let variance = if v.len() > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            CellSummary {
                k_true,
                init,
                mean,
                variance,
                replicates: v.len(),
            }
        })
        .collect();
    SummaryStats { cells }
}

/// Report manifest: configuration echo, seeds, and per-trial metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub experiment: &'a ExperimentConfig,
    pub hyper: &'a HyperParams,
    pub inference: &'a InferenceConfig,
    pub dataset_seeds: BTreeMap<usize, u64>,
    pub trials: &'a [TrialResult],
}

pub fn trace_file_name(r: &TrialResult) -> String {
    format!("Ktrue{}_init{}_rep{}.csv", r.k_true, r.init.label(), r.replicate)
}

/// Writes `summary.csv`, `traces/*.csv` and `manifest.json` under `dir`.
pub fn emit_report(
    stats: &SummaryStats,
    results: &[TrialResult],
    cfg: &ExperimentConfig,
    hyper: &HyperParams,
    inference: &InferenceConfig,
    dir: &Path,
) -> Result<()> {
    write_summary_csv(&dir.join("summary.csv"), stats)?;
    for r in results {
        write_trace_csv(&dir.join("traces").join(trace_file_name(r)), &r.trace)?;
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg,
        hyper,
        inference,
        dataset_seeds: cfg.k_true.iter().map(|&k| (k, cfg.dataset_seed(k))).collect(),
        trials: results,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn write_summary_csv(path: &Path, stats: &SummaryStats) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(["K_true", "init", "mean", "variance"])?;
        for c in &stats.cells {
            out.write_record([c.k_true.to_string(), c.init.clone(), c.mean.to_string(), c.variance.to_string()])?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    })
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<(usize, String, f64, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
