//! Experiment driver: configs, training loops for the learned models and the
//! baselines, metrics, result files and ablation grids.

mod ablation;
mod config;
mod model;
mod results;
mod train;

pub use ablation::{run_ablation_grid, GridAxes, GridRow, GridSpec};
pub use config::{ExperimentConfig, ModelKind};
pub use model::{evaluate, greedy_round, Metrics, Model, Prediction};
pub use results::{
    emit_results, read_csv, summarize, write_csv, Checkpoint, EpochRecord, MeanStd, MetricSummary,
    Summary,
};
pub use train::{
    baseline_box_constrained, baseline_lp_max_knapsack, baseline_mlp, run, run_seed,
    train_knapsack, train_static_constraints, RunOutput,
};
