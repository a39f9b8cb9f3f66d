//! Cartesian grids over the ablation axes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{parse_by_extension, ExperimentConfig};
use super::results::{emit_results, write_csv, EpochRecord, MeanStd};
use super::train::run;
use crate::comboptnet::{BasisMode, Temperature};
use crate::constraints::ParamMode;
use crate::datasets::Dataset;
use crate::error::Result;
use crate::nn::LossKind;

/// Values to sweep. An empty axis keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridAxes {
    pub temperature: Vec<Temperature>,
    pub basis: Vec<BasisMode>,
    pub param_mode: Vec<ParamMode>,
    pub loss: Vec<LossKind>,
    pub multiplier: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Dataset file, relative to the grid file.
    pub dataset: PathBuf,
    /// Output directory, relative to the grid file.
    pub out_dir: PathBuf,
    #[serde(default)]
    pub base: ExperimentConfig,
    #[serde(default)]
    pub axes: GridAxes,
}

impl GridSpec {
    /// Reads a grid and resolves its paths against the file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let mut g: Self = parse_by_extension(path, &std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        g.dataset = dir.join(&g.dataset);
        g.out_dir = dir.join(&g.out_dir);
        g.base.validate()?;
        Ok(g)
    }

    /// Every combination of the axes, in a fixed order.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
            if values.is_empty() {
                vec![base]
            } else {
                values.to_vec()
            }
        }
        let b = &self.base;
        let mut out = Vec::new();
        for &temperature in &axis(&self.axes.temperature, b.temperature) {
            for &basis in &axis(&self.axes.basis, b.basis) {
                for &param_mode in &axis(&self.axes.param_mode, b.param_mode) {
                    for &loss in &axis(&self.axes.loss, b.loss) {
                        for &multiplier in &axis(&self.axes.multiplier, b.multiplier) {
                            out.push(ExperimentConfig {
                                temperature,
                                basis,
                                param_mode,
                                loss,
                                multiplier,
                                ..b.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One line of the ablation table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub config_hash: String,
    pub temperature: String,
    pub basis: String,
    pub param_mode: String,
    pub loss: String,
    pub multiplier: usize,
    pub last_mean: f64,
    pub last_std: f64,
    pub best_mean: f64,
    pub best_std: f64,
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(String::from))
        .unwrap_or_default()
}

/// Runs every cell, writes per-cell outputs under `out_dir/<hash>/`, all
/// records to `out_dir/results.csv` and the table to `out_dir/table.csv`.
pub fn run_ablation_grid(grid: &GridSpec, ds: &Dataset, out_dir: &Path) -> Result<Vec<GridRow>> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    let mut all: Vec<EpochRecord> = Vec::new();
    for cfg in grid.cells() {
        cfg.validate()?;
        let runs = run(&cfg, ds)?;
        let summary = emit_results(&cfg, Some(&ds.spec), &runs, &out_dir.join(cfg.hash()))?;
        all.extend(runs.iter().flat_map(|r| r.records.iter().cloned()));
        let ms = |m: MeanStd| (m.mean, m.std);
        let (last_mean, last_std) = ms(summary.last.exact_match);
        let (best_mean, best_std) = ms(summary.best.exact_match);
        rows.push(GridRow {
            config_hash: cfg.hash(),
            temperature: cfg.temperature.to_string(),
            basis: label(&cfg.basis),
            param_mode: label(&cfg.param_mode),
            loss: label(&cfg.loss),
            multiplier: cfg.multiplier,
            last_mean,
            last_std,
            best_mean,
            best_std,
        });
    }
    write_csv(&all, &out_dir.join("results.csv"))?;
    let mut w = csv::Writer::from_path(out_dir.join("table.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}
