use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::datasets::{knapsack_instance, Dataset, DatasetSpec, Item, KnapsackSpec};
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, solve_lp_relaxation, IlpInstance, LpStatus, SolveStatus};
use crate::nn::{normalize_cost, BoxFrame, Mlp};
use crate::par;

/// Anything that maps a dataset item to a predicted integer point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// Learned constraints in the normalized frame; the item input is the cost.
    Constraints { set: ConstraintSet },
    /// Per-item network predicting `(weight, price)` from item features,
    /// which are multiplied by `input_scale` first.
    Extractor {
        mlp: Mlp,
        #[serde(default = "unit_scale")]
        input_scale: f64,
    },
    /// Network regressing the normalized solution from the scaled item input.
    Regressor {
        mlp: Mlp,
        #[serde(default = "unit_scale")]
        input_scale: f64,
    },
    BoxConstrained,
    LpMax,
}

fn unit_scale() -> f64 {
    1.0
}

/// Fixed input multiplier for the learned models: one over the RMS norm of
/// the per-item feature vectors of the training split on knapsack data, and
/// 1 elsewhere.
pub fn input_scale(ds: &Dataset) -> f64 {
    let DatasetSpec::Knapsack(spec) = &ds.spec else {
        return 1.0;
    };
    let (sum, count) = ds
        .train
        .iter()
        .flat_map(|it| it.input.chunks(spec.feature_dim))
        .fold((0.0, 0usize), |(s, c), x| (s + x.iter().map(|v| v * v).sum::<f64>(), c + 1));
    if count == 0 || sum <= 0.0 {
        return 1.0;
    }
    (count as f64 / sum).sqrt()
}

pub(crate) fn scaled(input: &[f64], scale: f64) -> Vec<f64> {
    input.iter().map(|v| v * scale).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub y: Vec<i64>,
    /// Solver status when the prediction came from an ILP solve.
    pub status: Option<SolveStatus>,
}

pub(crate) fn knapsack_spec(ds: &Dataset) -> Result<&KnapsackSpec> {
    match &ds.spec {
        DatasetSpec::Knapsack(s) => Ok(s),
        _ => Err(Error::Config("model requires a knapsack dataset".into())),
    }
}

/// Instance solved by a model that uses the learned constraints `set`.
pub(crate) fn constraint_instance(set: &ConstraintSet, frame: &BoxFrame, cost: &[f64]) -> IlpInstance {
    let (a, b) = set.to_matrix_form();
    let (a_int, b_int) = frame.constraints_to_integer(&a, &b);
    IlpInstance::new(
        frame.cost_to_integer(&normalize_cost(cost)),
        a_int,
        b_int,
        frame.low.clone(),
        frame.high.clone(),
    )
}

/// Knapsack instance built from predicted weights and prices, with the cost
/// normalized to unit length.
pub(crate) fn predicted_knapsack(spec: &KnapsackSpec, weights: &[f64], prices: &[f64]) -> IlpInstance {
    let mut inst = knapsack_instance(spec, weights, prices);
    inst.cost = normalize_cost(&inst.cost);
    inst
}

/// Runs the extractor on every item of a knapsack input.
pub(crate) fn extract(
    mlp: &Mlp,
    spec: &KnapsackSpec,
    input: &[f64],
    input_scale: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if input.len() != spec.items * spec.feature_dim {
        return Err(Error::Shape("knapsack input has the wrong length".into()));
    }
    let mut w = Vec::with_capacity(spec.items);
    let mut p = Vec::with_capacity(spec.items);
    for chunk in input.chunks(spec.feature_dim) {
        let out = mlp.predict(&scaled(chunk, input_scale))?;
        w.push(out[0]);
        p.push(out[1]);
    }
    Ok((w, p))
}

/// Greedy repair of an LP point: items by decreasing LP value (ties by
/// index), each taken if it still fits.
pub fn greedy_round(lp_point: &[f64], weights: &[f64], capacity: f64) -> Vec<i64> {
    let mut order: Vec<usize> = (0..lp_point.len()).collect();
    order.sort_by(|&i, &j| lp_point[j].total_cmp(&lp_point[i]));
    let mut y = vec![0; lp_point.len()];
    let mut load = 0.0;
    for i in order {
        if load + weights[i] <= capacity {
            load += weights[i];
            y[i] = 1;
        }
    }
    y
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Constraints { .. } => "constraints",
            Model::Extractor { .. } => "extractor",
            Model::Regressor { .. } => "regressor",
            Model::BoxConstrained => "box_constrained",
            Model::LpMax => "lp_max",
        }
    }

    pub fn predict(&self, ds: &Dataset, item: &Item) -> Result<Prediction> {
        let (low, high) = ds.bounds();
        let frame = BoxFrame::new(&low, &high);
        let solved = |inst: IlpInstance| -> Result<Prediction> {
            let r = solve_ilp(&inst)?;
            Ok(Prediction {
                y: r.solution,
                status: Some(r.status),
            })
        };
        match self {
            Model::Constraints { set } => {
                if set.dim() != low.len() {
                    return Err(Error::Shape(format!(
                        "model has dimension {}, dataset {}",
                        set.dim(),
                        low.len()
                    )));
                }
                solved(constraint_instance(set, &frame, &item.input))
            }
            Model::Extractor { mlp, input_scale } => {
                let spec = knapsack_spec(ds)?;
                let (w, p) = extract(mlp, spec, &item.input, *input_scale)?;
                solved(predicted_knapsack(spec, &w, &p))
            }
            Model::Regressor { mlp, input_scale } => Ok(Prediction {
                y: frame.denormalize(&mlp.predict(&scaled(&item.input, *input_scale))?),
                status: None,
            }),
            Model::BoxConstrained => {
                if knapsack_spec(ds).is_ok() {
                    return Err(Error::Config("the box baseline needs an explicit cost vector".into()));
                }
                let cost = frame.cost_to_integer(&normalize_cost(&item.input));
                solved(IlpInstance::new(cost, vec![], vec![], low, high))
            }
            Model::LpMax => {
                let spec = knapsack_spec(ds)?;
                let inst = ds.instance(item);
                let lp = solve_lp_relaxation(&inst)?;
                if lp.status != LpStatus::Optimal {
                    return Err(Error::InvalidInstance("knapsack LP is not solvable".into()));
                }
                let w = item.weights.as_deref().unwrap_or_default();
                let scaled: Vec<f64> = w.iter().map(|v| v * spec.scale).collect();
                Ok(Prediction {
                    y: greedy_round(&lp.point, &scaled, spec.scale * spec.capacity),
                    status: None,
                })
            }
        }
    }
}

/// Test-set quality of a model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub count: usize,
    /// Share of instances with `y = y*`.
    pub exact_match: f64,
    /// Share of coordinates with `y_i = y*_i`.
    pub per_variable: f64,
    /// Share of predictions satisfying the true constraints.
    pub truth_feasible: f64,
    /// Mean of `obj(y) - obj(y*)` under the true cost.
    pub objective_gap: f64,
    /// Share of solves that returned the least-violation fallback.
    pub fallback_rate: f64,
    pub solver_calls: usize,
}

pub fn evaluate(model: &Model, ds: &Dataset, items: &[Item]) -> Result<Metrics> {
    let preds = par::try_map(items, |it| model.predict(ds, it))?;
    let mut m = Metrics {
        count: items.len(),
        ..Metrics::default()
    };
    if items.is_empty() {
        return Ok(m);
    }
    let mut exact = 0usize;
    let mut coords = 0usize;
    let mut coord_hits = 0usize;
    let mut feasible = 0usize;
    let mut fallbacks = 0usize;
    let mut gap = 0.0;
    for (it, p) in items.iter().zip(&preds) {
        exact += usize::from(p.y == it.label);
        coords += it.label.len();
        coord_hits += p.y.iter().zip(&it.label).filter(|(a, b)| a == b).count();
        let truth = ds.instance(it);
        feasible += usize::from(truth.in_box(&p.y) && truth.is_feasible(&p.y));
        gap += truth.objective(&p.y) - truth.objective(&it.label);
        if let Some(s) = p.status {
            m.solver_calls += 1;
            fallbacks += usize::from(s == SolveStatus::InfeasibleFallback);
        }
    }
    let n = items.len() as f64;
    m.exact_match = exact as f64 / n;
    m.per_variable = coord_hits as f64 / coords.max(1) as f64;
    m.truth_feasible = feasible as f64 / n;
    m.objective_gap = gap / n;
    m.fallback_rate = fallbacks as f64 / m.solver_calls.max(1) as f64;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_rounding_trace() {
        // LP point of the two-item gap example: item 0 first, then item 1
        // no longer fits.
        assert_eq!(greedy_round(&[1.0, 0.5], &[1.0, 2.0], 2.0), vec![1, 0]);
        assert_eq!(greedy_round(&[0.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 2.0), vec![0, 1, 1]);
    }
}
