//! Training loops. Every trainable model exposes a flat parameter vector and
//! a per-sample loss gradient; [`fit`] does the shuffling, batching, Adam
//! steps and per-epoch evaluation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ModelKind};
use super::model::{constraint_instance, evaluate, input_scale, knapsack_spec, predicted_knapsack, scaled, Model};
use super::results::EpochRecord;
use crate::comboptnet::{backward, BackwardConfig};
use crate::constraints::ConstraintSet;
use crate::datasets::{Dataset, GroundTruth, Item, KnapsackSpec, Task};
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, SolveStatus};
use crate::nn::{loss_and_gradient, normalize_cost_backward, Adam, BoxFrame, LossKind, Mlp, OutputScale};
use crate::par;

const SHUFFLE_SALT: u64 = 0x5DEE_CE66_D1CE_4E5B;
// Keeps model initialization independent of dataset streams with the same seed.
const INIT_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ INIT_SALT)
}

/// A trained (or parameter-free) model with its evaluation history.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub seed: u64,
    pub model: Model,
    pub optimizer: Option<Adam>,
    pub records: Vec<EpochRecord>,
    pub wall_clock_s: f64,
}

struct SampleGrad {
    loss: f64,
    grad: Vec<f64>,
    fallback: bool,
}

trait Trainable: Sync {
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    fn sample(&self, ds: &Dataset, item: &Item) -> Result<SampleGrad>;
    fn model(&self) -> Model;
    fn uses_solver(&self) -> bool;
}

struct ConstraintLearner {
    set: ConstraintSet,
    frame: BoxFrame,
    backward: BackwardConfig,
    loss: LossKind,
}

impl Trainable for ConstraintLearner {
    fn params(&self) -> Vec<f64> {
        self.set.flatten()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.set.unflatten(params);
        self.set.validate()
    }

    fn sample(&self, _ds: &Dataset, item: &Item) -> Result<SampleGrad> {
        let f = &self.frame;
        let inst = constraint_instance(&self.set, f, &item.input);
        let res = solve_ilp(&inst)?;
        let (loss, dx) = loss_and_gradient(self.loss, &f.normalize(&res.solution), &f.normalize(&item.label));
        let dy = f.grad_to_integer(&dx);
        // Distances over y are `width` times those over x.
        let cfg = BackwardConfig {
            temperature: self.backward.temperature.scaled(f.width()[0]),
            ..self.backward
        };
        let g = backward(
            &inst.constraint_matrix,
            &inst.bias,
            &inst.cost,
            &res.solution,
            &dy,
            &f.low,
            &f.high,
            &cfg,
        )?;
        let (da, db) = f.constraint_grads_from_integer(&g.da, &g.db);
        let pg = self.set.pull_back_gradients(&da, &db)?;
        Ok(SampleGrad {
            loss,
            grad: self.set.flatten_grads(&pg),
            fallback: res.status == SolveStatus::InfeasibleFallback,
        })
    }

    fn model(&self) -> Model {
        Model::Constraints {
            set: self.set.clone(),
        }
    }

    fn uses_solver(&self) -> bool {
        true
    }
}

struct KnapsackLearner {
    mlp: Mlp,
    input_scale: f64,
    spec: KnapsackSpec,
    backward: BackwardConfig,
    loss: LossKind,
}

impl Trainable for KnapsackLearner {
    fn params(&self) -> Vec<f64> {
        self.mlp.params.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.mlp.params.copy_from_slice(params);
        self.mlp.validate()
    }

    fn sample(&self, _ds: &Dataset, item: &Item) -> Result<SampleGrad> {
        let spec = &self.spec;
        let caches = item
            .input
            .chunks(spec.feature_dim)
            .map(|chunk| self.mlp.forward(&scaled(chunk, self.input_scale)))
            .collect::<Result<Vec<_>>>()?;
        let w: Vec<f64> = caches.iter().map(|c| c.output()[0]).collect();
        let p: Vec<f64> = caches.iter().map(|c| c.output()[1]).collect();
        let inst = predicted_knapsack(spec, &w, &p);
        let res = solve_ilp(&inst)?;
        let frame = BoxFrame::new(&inst.box_low, &inst.box_high);
        let (loss, dx) = loss_and_gradient(self.loss, &frame.normalize(&res.solution), &frame.normalize(&item.label));
        let dy = frame.grad_to_integer(&dx);
        let g = backward(
            &inst.constraint_matrix,
            &inst.bias,
            &inst.cost,
            &res.solution,
            &dy,
            &inst.box_low,
            &inst.box_high,
            &self.backward,
        )?;
        // cost = normalize(-s p), row = s w.
        let raw_cost: Vec<f64> = p.iter().map(|v| -spec.scale * v).collect();
        let dc_raw = normalize_cost_backward(&raw_cost, &g.dc);
        let mut grad = vec![0.0; self.mlp.num_params()];
        for (i, cache) in caches.iter().enumerate() {
            let dout = [spec.scale * g.da[0][i], -spec.scale * dc_raw[i]];
            self.mlp.backward(cache, &dout, &mut grad);
        }
        Ok(SampleGrad {
            loss,
            grad,
            fallback: res.status == SolveStatus::InfeasibleFallback,
        })
    }

    fn model(&self) -> Model {
        Model::Extractor {
            mlp: self.mlp.clone(),
            input_scale: self.input_scale,
        }
    }

    fn uses_solver(&self) -> bool {
        true
    }
}

struct Regressor {
    mlp: Mlp,
    input_scale: f64,
    frame: BoxFrame,
}

impl Trainable for Regressor {
    fn params(&self) -> Vec<f64> {
        self.mlp.params.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.mlp.params.copy_from_slice(params);
        self.mlp.validate()
    }

    fn sample(&self, _ds: &Dataset, item: &Item) -> Result<SampleGrad> {
        let cache = self.mlp.forward(&scaled(&item.input, self.input_scale))?;
        let (loss, dx) = loss_and_gradient(LossKind::Mse, cache.output(), &self.frame.normalize(&item.label));
        let mut grad = vec![0.0; self.mlp.num_params()];
        self.mlp.backward(&cache, &dx, &mut grad);
        Ok(SampleGrad {
            loss,
            grad,
            fallback: false,
        })
    }

    fn model(&self) -> Model {
        Model::Regressor {
            mlp: self.mlp.clone(),
            input_scale: self.input_scale,
        }
    }

    fn uses_solver(&self) -> bool {
        false
    }
}

fn splits<'a>(cfg: &ExperimentConfig, ds: &'a Dataset) -> (&'a [Item], &'a [Item]) {
    let tr = cfg.train_limit.unwrap_or(usize::MAX).min(ds.train.len());
    let te = cfg.test_limit.unwrap_or(usize::MAX).min(ds.test.len());
    (&ds.train[..tr], &ds.test[..te])
}

fn record(cfg: &ExperimentConfig, seed: u64, epoch: usize, model: &Model, ds: &Dataset, test: &[Item]) -> Result<EpochRecord> {
    let metrics = evaluate(model, ds, test)?;
    Ok(EpochRecord::new(cfg, seed, epoch, metrics))
}

fn fit<T: Trainable>(cfg: &ExperimentConfig, ds: &Dataset, seed: u64, mut learner: T) -> Result<RunOutput> {
    let start = Instant::now();
    let (train, test) = splits(cfg, ds);
    let mut params = learner.params();
    let mut adam = Adam::new(params.len(), cfg.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_SALT);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut records = vec![record(cfg, seed, 0, &learner.model(), ds, test)?];

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut calls = 0usize;
        let mut fallbacks = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let items: Vec<&Item> = batch.iter().map(|&i| &train[i]).collect();
            let grads = par::try_map(&items, |it| learner.sample(ds, it))?;
            let mut total = vec![0.0; params.len()];
            for g in &grads {
                loss_sum += g.loss;
                fallbacks += usize::from(g.fallback);
                for (t, v) in total.iter_mut().zip(&g.grad) {
                    *t += v;
                }
            }
            if learner.uses_solver() {
                calls += grads.len();
            }
            let scale = 1.0 / grads.len() as f64;
            total.iter_mut().for_each(|v| *v *= scale);
            adam.step(&mut params, &total);
            if !params.iter().all(|p| p.is_finite()) {
                return Err(Error::Diverged(format!("non-finite parameters in epoch {epoch}")));
            }
            learner.set_params(&params)?;
        }
        let mut rec = record(cfg, seed, epoch, &learner.model(), ds, test)?;
        rec.train_loss = Some(loss_sum / train.len().max(1) as f64);
        rec.train_solver_calls = calls;
        rec.train_fallbacks = fallbacks;
        records.push(rec);
    }
    Ok(RunOutput {
        seed,
        model: learner.model(),
        optimizer: Some(adam),
        records,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Number of ground-truth constraints, used to size the learnable set.
fn truth_rows(ds: &Dataset) -> Result<usize> {
    match &ds.ground_truth {
        GroundTruth::Constraints(t) => Ok(t.bias.len()),
        GroundTruth::Knapsack { .. } => Err(Error::Config("static constraints need an RC or WSC dataset".into())),
    }
}

/// Learns `multiplier × m` constraints from (cost, solution) pairs.
pub fn train_static_constraints(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    let m = truth_rows(ds)? * cfg.multiplier;
    let (low, high) = ds.bounds();
    let mut rng = init_rng(seed);
    let learner = ConstraintLearner {
        set: ConstraintSet::random_init(low.len(), m, cfg.param_mode, &mut rng),
        frame: BoxFrame::new(&low, &high),
        backward: cfg.backward_config(),
        loss: cfg.loss,
    };
    fit(cfg, ds, seed, learner)
}

/// Learns a per-item feature extractor for weights and prices.
pub fn train_knapsack(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    let spec = knapsack_spec(ds)?.clone();
    let mut rng = init_rng(seed);
    let scale = OutputScale {
        lo: vec![spec.weight_range[0], spec.price_range[0]],
        hi: vec![spec.weight_range[1], spec.price_range[1]],
    };
    let mlp = Mlp::new(&[spec.feature_dim, cfg.extractor_hidden, 2], Some(scale), &mut rng);
    let learner = KnapsackLearner {
        mlp,
        input_scale: input_scale(ds),
        spec,
        backward: cfg.backward_config(),
        loss: cfg.loss,
    };
    fit(cfg, ds, seed, learner)
}

/// Regresses the normalized solution directly and rounds into the box.
pub fn baseline_mlp(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    let (low, high) = ds.bounds();
    let input = ds
        .train
        .first()
        .ok_or_else(|| Error::Config("dataset has no training items".into()))?
        .input
        .len();
    let mut dims = vec![input];
    dims.extend(&cfg.mlp_hidden);
    dims.push(low.len());
    let mut rng = init_rng(seed);
    let learner = Regressor {
        mlp: Mlp::new(&dims, None, &mut rng),
        input_scale: input_scale(ds),
        frame: BoxFrame::new(&low, &high),
    };
    fit(cfg, ds, seed, learner)
}

fn untrained(cfg: &ExperimentConfig, ds: &Dataset, seed: u64, model: Model) -> Result<RunOutput> {
    let start = Instant::now();
    let (_, test) = splits(cfg, ds);
    let records = vec![record(cfg, seed, 0, &model, ds, test)?];
    Ok(RunOutput {
        seed,
        model,
        optimizer: None,
        records,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Solves each test instance with the box as the only constraint.
pub fn baseline_box_constrained(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    untrained(cfg, ds, seed, Model::BoxConstrained)
}

/// LP relaxation on the true knapsack data, rounded greedily.
pub fn baseline_lp_max_knapsack(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    knapsack_spec(ds)?;
    untrained(cfg, ds, seed, Model::LpMax)
}

/// Runs `cfg.model` on `ds` for one seed.
pub fn run_seed(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    match (cfg.model, ds.task()) {
        (ModelKind::Comboptnet, Task::Knapsack) => train_knapsack(cfg, ds, seed),
        (ModelKind::Comboptnet, _) => train_static_constraints(cfg, ds, seed),
        (ModelKind::Mlp, _) => baseline_mlp(cfg, ds, seed),
        (ModelKind::BoxConstrained, _) => baseline_box_constrained(cfg, ds, seed),
        (ModelKind::LpMax, _) => baseline_lp_max_knapsack(cfg, ds, seed),
    }
}

/// Runs every seed of `cfg`.
pub fn run(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<RunOutput>> {
    cfg.seeds.iter().map(|&s| run_seed(cfg, ds, s)).collect()
}
