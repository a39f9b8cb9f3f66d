//! Synthetic datasets: random constraints (RC), weighted set cover (WSC) and
//! knapsack-from-features, with JSON-lines storage.
//!
//! Every dataset carries its generating spec, the ground truth needed to
//! rebuild each labelled instance, and train/test items. Labels are solver
//! optima, so re-solving an item reproduces its label exactly.

mod io;
mod knapsack;
mod rc;
mod wsc;

use serde::{Deserialize, Serialize};

use crate::ilp::{IlpInstance, RowSense};
use crate::nn::BoxFrame;

pub use io::{load, save, to_jsonl, GENERATOR_VERSION, SCHEMA_VERSION};
pub use knapsack::{generate_knapsack, knapsack_instance, KnapsackSpec};
pub use rc::{feasible_fraction, generate_rc, RcSpec};
pub use wsc::{generate_wsc, WscSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    #[default]
    Binary,
    Dense,
}

impl BoxKind {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            BoxKind::Binary => (0, 1),
            BoxKind::Dense => (-5, 5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Rc,
    Wsc,
    Knapsack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum DatasetSpec {
    Rc(RcSpec),
    Wsc(WscSpec),
    Knapsack(KnapsackSpec),
}

impl DatasetSpec {
    pub fn task(&self) -> Task {
        match self {
            DatasetSpec::Rc(_) => Task::Rc,
            DatasetSpec::Wsc(_) => Task::Wsc,
            DatasetSpec::Knapsack(_) => Task::Knapsack,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            DatasetSpec::Rc(s) => s.seed,
            DatasetSpec::Wsc(s) => s.seed,
            DatasetSpec::Knapsack(s) => s.seed,
        }
    }
}

/// Constraints over the integer variables `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTruth {
    pub constraint_matrix: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub sense: Vec<RowSense>,
    pub box_low: Vec<i64>,
    pub box_high: Vec<i64>,
}

impl ConstraintTruth {
    pub fn frame(&self) -> BoxFrame {
        BoxFrame::new(&self.box_low, &self.box_high)
    }

    /// The labelled instance for cost `c` (given in the normalized frame).
    pub fn instance(&self, c: &[f64]) -> IlpInstance {
        IlpInstance {
            cost: self.frame().cost_to_integer(c),
            constraint_matrix: self.constraint_matrix.clone(),
            bias: self.bias.clone(),
            box_low: self.box_low.clone(),
            box_high: self.box_high.clone(),
            sense: self.sense.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Constraints(ConstraintTruth),
    /// Feature map `x = W [w; p] + ε`; `W` is `d × 2`, row-major.
    Knapsack { feature_matrix: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    /// Cost vector (RC, WSC) or concatenated item features (knapsack).
    pub input: Vec<f64>,
    pub label: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub ground_truth: GroundTruth,
    pub train: Vec<Item>,
    pub test: Vec<Item>,
}

impl Dataset {
    pub fn task(&self) -> Task {
        self.spec.task()
    }

    /// Number of decision variables per instance.
    pub fn num_vars(&self) -> usize {
        self.train
            .first()
            .or(self.test.first())
            .map_or(0, |it| it.label.len())
    }

    /// Integer box shared by all instances.
    pub fn bounds(&self) -> (Vec<i64>, Vec<i64>) {
        match &self.ground_truth {
            GroundTruth::Constraints(t) => (t.box_low.clone(), t.box_high.clone()),
            GroundTruth::Knapsack { .. } => (vec![0; self.num_vars()], vec![1; self.num_vars()]),
        }
    }

    /// Ground-truth instance of `item`.
    pub fn instance(&self, item: &Item) -> IlpInstance {
        match (&self.ground_truth, &self.spec) {
            (GroundTruth::Constraints(t), _) => t.instance(&item.input),
            (GroundTruth::Knapsack { .. }, DatasetSpec::Knapsack(spec)) => knapsack_instance(
                spec,
                item.weights.as_deref().unwrap_or_default(),
                item.prices.as_deref().unwrap_or_default(),
            ),
            _ => unreachable!("knapsack ground truth with a non-knapsack spec"),
        }
    }
}

/// Generates the dataset described by `spec`.
pub fn generate(spec: &DatasetSpec) -> crate::Result<Dataset> {
    match spec {
        DatasetSpec::Rc(s) => generate_rc(s),
        DatasetSpec::Wsc(s) => generate_wsc(s),
        DatasetSpec::Knapsack(s) => generate_knapsack(s),
    }
}
