//! Result files: one CSV row per (config, seed, epoch), a JSON summary with
//! mean ± standard deviation over seeds, and JSON checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::model::{Metrics, Model};
use super::train::RunOutput;
use crate::datasets::DatasetSpec;
use crate::error::{Error, Result};
use crate::nn::Adam;

/// One evaluation of one seed. Contains no timing, so identical runs give
/// identical rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub config_hash: String,
    pub model: String,
    pub seed: u64,
    pub epoch: usize,
    pub train_loss: Option<f64>,
    pub exact_match: f64,
    pub per_variable: f64,
    pub truth_feasible: f64,
    pub objective_gap: f64,
    pub fallback_rate: f64,
    pub solver_calls: usize,
    pub train_solver_calls: usize,
    pub train_fallbacks: usize,
}

impl EpochRecord {
    pub fn new(cfg: &ExperimentConfig, seed: u64, epoch: usize, m: Metrics) -> Self {
        Self {
            config_hash: cfg.hash(),
            model: cfg.model.name().into(),
            seed,
            epoch,
            train_loss: None,
            exact_match: m.exact_match,
            per_variable: m.per_variable,
            truth_feasible: m.truth_feasible,
            objective_gap: m.objective_gap,
            fallback_rate: m.fallback_rate,
            solver_calls: m.solver_calls,
            train_solver_calls: 0,
            train_fallbacks: 0,
        }
    }
}

pub fn write_csv(records: &[EpochRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and sample standard deviation (zero for a single value).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Epoch used for each seed, in seed order.
    pub epochs: Vec<usize>,
    pub exact_match: MeanStd,
    pub per_variable: MeanStd,
    pub truth_feasible: MeanStd,
    pub objective_gap: MeanStd,
    pub fallback_rate: MeanStd,
}

impl MetricSummary {
    fn of(picked: &[&EpochRecord]) -> Self {
        let col = |f: fn(&EpochRecord) -> f64| MeanStd::of(&picked.iter().map(|r| f(r)).collect::<Vec<_>>());
        Self {
            epochs: picked.iter().map(|r| r.epoch).collect(),
            exact_match: col(|r| r.exact_match),
            per_variable: col(|r| r.per_variable),
            truth_feasible: col(|r| r.truth_feasible),
            objective_gap: col(|r| r.objective_gap),
            fallback_rate: col(|r| r.fallback_rate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub model: String,
    pub config: ExperimentConfig,
    pub dataset: Option<DatasetSpec>,
    pub seeds: Vec<u64>,
    /// Final epoch of every seed.
    pub last: MetricSummary,
    /// Epoch with the highest exact-match accuracy of every seed (earliest
    /// on ties).
    pub best: MetricSummary,
    pub wall_clock_s: Vec<f64>,
}

/// Aggregates the records of every seed of one config.
pub fn summarize(cfg: &ExperimentConfig, dataset: Option<&DatasetSpec>, runs: &[RunOutput]) -> Summary {
    let last: Vec<&EpochRecord> = runs.iter().filter_map(|r| r.records.last()).collect();
    let best: Vec<&EpochRecord> = runs
        .iter()
        .filter_map(|r| {
            r.records
                .iter()
                .reduce(|a, b| if b.exact_match > a.exact_match { b } else { a })
        })
        .collect();
    Summary {
        config_hash: cfg.hash(),
        model: cfg.model.name().into(),
        config: cfg.clone(),
        dataset: dataset.cloned(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        last: MetricSummary::of(&last),
        best: MetricSummary::of(&best),
        wall_clock_s: runs.iter().map(|r| r.wall_clock_s).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub dataset: Option<DatasetSpec>,
    pub model: Model,
    pub optimizer: Option<Adam>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

/// Writes `results.csv`, `summary.json` and one `checkpoint_seed<k>.json`
/// per seed into `out_dir`.
pub fn emit_results(
    cfg: &ExperimentConfig,
    dataset: Option<&DatasetSpec>,
    runs: &[RunOutput],
    out_dir: &Path,
) -> Result<Summary> {
    std::fs::create_dir_all(out_dir)?;
    let records: Vec<EpochRecord> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
    write_csv(&records, &out_dir.join("results.csv"))?;
    let summary = summarize(cfg, dataset, runs);
    std::fs::write(out_dir.join("summary.json"), serde_json::to_vec_pretty(&summary)?)?;
    for r in runs {
        Checkpoint {
            config: cfg.clone(),
            config_hash: cfg.hash(),
            seed: r.seed,
            dataset: dataset.cloned(),
            model: r.model.clone(),
            optimizer: r.optimizer.clone(),
        }
        .save(&out_dir.join(format!("checkpoint_seed{}.json", r.seed)))?;
    }
    Ok(summary)
}
