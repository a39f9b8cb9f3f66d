//! Knapsack from item features. Each instance has ten items with a hidden
//! weight and price; only a noisy linear embedding of `(weight, price)` is
//! observed. Labels maximize total price under the capacity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetSpec, GroundTruth, Item};
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, IlpInstance, SolveStatus};
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackSpec {
    pub items: usize,
    pub weight_range: [f64; 2],
    pub price_range: [f64; 2],
    pub capacity: f64,
    /// Applied to weights, prices and capacity before solving.
    pub scale: f64,
    pub feature_dim: usize,
    /// Noise level relative to the per-coordinate feature magnitude.
    pub noise: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl KnapsackSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            items: 10,
            weight_range: [15.0, 35.0],
            price_range: [10.0, 45.0],
            capacity: 100.0,
            scale: 0.01,
            feature_dim: 64,
            noise: 0.01,
            train_size: 4500,
            test_size: 500,
            seed,
        }
    }

    /// Standard deviation of the feature noise.
    pub fn noise_sigma(&self) -> f64 {
        let second_moment = |[lo, hi]: [f64; 2]| (lo * lo + lo * hi + hi * hi) / 3.0;
        let rms = ((second_moment(self.weight_range) + second_moment(self.price_range))
            / self.feature_dim as f64)
            .sqrt();
        self.noise * rms
    }
}

/// `min -s p·y` subject to `s w·y <= s C`, `y ∈ {0,1}^n`.
pub fn knapsack_instance(spec: &KnapsackSpec, weights: &[f64], prices: &[f64]) -> IlpInstance {
    let s = spec.scale;
    IlpInstance::binary(
        prices.iter().map(|p| -s * p).collect(),
        vec![weights.iter().map(|w| s * w).collect()],
        vec![s * spec.capacity],
    )
}

/// `d × 2` matrix with orthonormal columns.
fn feature_matrix(d: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    loop {
        let mut u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nu < 1e-6 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= nu);
        let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&u).for_each(|(x, a)| *x -= proj * a);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        return u.into_iter().zip(v).map(|(a, b)| [a, b]).collect();
    }
}

pub fn generate_knapsack(spec: &KnapsackSpec) -> Result<Dataset> {
    if spec.items == 0 || spec.feature_dim < 2 || spec.capacity <= 0.0 || spec.scale <= 0.0 {
        return Err(Error::Generation("invalid knapsack spec".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w_mat = feature_matrix(spec.feature_dim, &mut rng);
    let sigma = spec.noise_sigma();
    let noise = Normal::new(0.0, sigma.max(0.0)).map_err(|e| Error::Generation(e.to_string()))?;

    let draws: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..spec.train_size + spec.test_size)
        .map(|_| {
            let weights: Vec<f64> = (0..spec.items)
                .map(|_| rng.random_range(spec.weight_range[0]..=spec.weight_range[1]))
                .collect();
            let prices: Vec<f64> = (0..spec.items)
                .map(|_| rng.random_range(spec.price_range[0]..=spec.price_range[1]))
                .collect();
            let mut features = Vec::with_capacity(spec.items * spec.feature_dim);
            for (w, p) in weights.iter().zip(&prices) {
                for row in &w_mat {
                    let eps = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    features.push(row[0] * w + row[1] * p + eps);
                }
            }
            (features, weights, prices)
        })
        .collect();

    let mut items = par::try_map(&draws, |(features, weights, prices)| {
        let res = solve_ilp(&knapsack_instance(spec, weights, prices))?;
        if res.status != SolveStatus::Optimal {
            return Err(Error::Generation("knapsack instance is infeasible".into()));
        }
        Ok(Item {
            input: features.clone(),
            label: res.solution,
            weights: Some(weights.clone()),
            prices: Some(prices.clone()),
        })
    })?;
    let test = items.split_off(spec.train_size);
    Ok(Dataset {
        spec: DatasetSpec::Knapsack(spec.clone()),
        ground_truth: GroundTruth::Knapsack { feature_matrix: w_mat },
        train: items,
        test,
    })
}
