//! Weighted set cover: choose the cheapest family of subsets whose union is
//! the universe. Row `k` reads `Σ_j ⟦k ∈ S_j⟧ y_j >= 1`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConstraintTruth, Dataset, DatasetSpec, GroundTruth, Item};
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, RowSense, SolveStatus};
use crate::par;

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WscSpec {
    /// Universe size; there are `2 m` subsets.
    pub m: usize,
    pub max_subset_size: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl WscSpec {
    pub fn new(m: usize, seed: u64) -> Self {
        Self {
            m,
            max_subset_size: 3,
            train_size: 1600,
            test_size: 1000,
            seed,
        }
    }

    pub fn num_subsets(&self) -> usize {
        2 * self.m
    }
}

/// `2m` subsets with sizes uniform in `1..=max`, redrawn until they cover.
fn draw_cover(spec: &WscSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    let top = spec.max_subset_size.min(spec.m);
    for _ in 0..MAX_ATTEMPTS {
        let subsets: Vec<Vec<usize>> = (0..spec.num_subsets())
            .map(|_| {
                let size = rng.random_range(1..=top);
                let mut s = sample(rng, spec.m, size).into_vec();
                s.sort_unstable();
                s
            })
            .collect();
        let mut covered = vec![false; spec.m];
        subsets.iter().flatten().for_each(|&k| covered[k] = true);
        if covered.iter().all(|&c| c) {
            return Ok(subsets);
        }
    }
    Err(Error::Generation("no covering family found".into()))
}

pub fn generate_wsc(spec: &WscSpec) -> Result<Dataset> {
    if spec.m == 0 || spec.max_subset_size == 0 {
        return Err(Error::Generation("WSC needs m >= 1 and subset size >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let subsets = draw_cover(spec, &mut rng)?;
    let n = spec.num_subsets();
    let matrix = (0..spec.m)
        .map(|k| {
            subsets
                .iter()
                .map(|s| if s.contains(&k) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let truth = ConstraintTruth {
        constraint_matrix: matrix,
        bias: vec![1.0; spec.m],
        sense: vec![RowSense::Ge; spec.m],
        box_low: vec![0; n],
        box_high: vec![1; n],
    };
    // (0, 1]
    let costs: Vec<Vec<f64>> = (0..spec.train_size + spec.test_size)
        .map(|_| (0..n).map(|_| 1.0 - rng.random::<f64>()).collect())
        .collect();
    let mut items = par::try_map(&costs, |c| {
        let res = solve_ilp(&truth.instance(c))?;
        if res.status != SolveStatus::Optimal {
            return Err(Error::Generation("cover instance is infeasible".into()));
        }
        Ok(Item {
            input: c.clone(),
            label: res.solution,
            weights: None,
            prices: None,
        })
    })?;
    let test = items.split_off(spec.train_size);
    Ok(Dataset {
        spec: DatasetSpec::Wsc(spec.clone()),
        ground_truth: GroundTruth::Constraints(truth),
        train: items,
        test,
    })
}
