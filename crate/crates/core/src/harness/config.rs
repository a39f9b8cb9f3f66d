use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::comboptnet::{BackwardConfig, BasisMode, Temperature};
use crate::constraints::ParamMode;
use crate::error::{Error, Result};
use crate::nn::LossKind;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Learnable constraints (RC, WSC) or feature extractor (knapsack)
    /// trained through the solver.
    #[default]
    Comboptnet,
    /// Direct regression from the input to the solution.
    Mlp,
    /// Solver with the box as the only constraint.
    BoxConstrained,
    /// LP relaxation on the true knapsack data with greedy rounding.
    LpMax,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Comboptnet => "comboptnet",
            ModelKind::Mlp => "mlp",
            ModelKind::BoxConstrained => "box_constrained",
            ModelKind::LpMax => "lp_max",
        }
    }

    pub fn is_trained(self) -> bool {
        matches!(self, ModelKind::Comboptnet | ModelKind::Mlp)
    }
}

/// One training run, repeated once per seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Learnable constraints per ground-truth constraint.
    pub multiplier: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub temperature: Temperature,
    pub basis: BasisMode,
    pub param_mode: ParamMode,
    pub loss: LossKind,
    pub seeds: Vec<u64>,
    /// Hidden width of the knapsack feature extractor.
    pub extractor_hidden: usize,
    /// Hidden widths of the MLP baseline.
    pub mlp_hidden: Vec<usize>,
    /// Use only the first `train_limit` training items.
    pub train_limit: Option<usize>,
    /// Evaluate on only the first `test_limit` test items.
    pub test_limit: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Comboptnet,
            multiplier: 1,
            batch_size: 8,
            epochs: 100,
            lr: 5e-4,
            temperature: Temperature::Soft(0.5),
            basis: BasisMode::Delta,
            param_mode: ParamMode::LearnableOrigins,
            loss: LossKind::Mse,
            seeds: vec![0],
            extractor_hidden: 512,
            mlp_hidden: vec![100, 100],
            train_limit: None,
            test_limit: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.multiplier == 0 {
            return bad("multiplier must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.extractor_hidden == 0 || self.mlp_hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }

    pub fn backward_config(&self) -> BackwardConfig {
        BackwardConfig {
            temperature: self.temperature,
            basis: self.basis,
        }
    }

    /// Hex prefix of the SHA-256 of the config without its seed list, so
    /// that all restarts of a setting share one hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.seeds.clear();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Reads JSON (`.json`) or TOML (anything else).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = parse_by_extension(path, &text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub(crate) fn parse_by_extension<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
