//! Random constraints: a few random hyperplanes cut the box, costs are
//! random unit vectors and labels are the resulting ILP optima.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoxKind, ConstraintTruth, Dataset, DatasetSpec, GroundTruth, Item};
use crate::constraints::{dot, random_unit_vector, ConstraintSet, ParamMode};
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, RowSense, SolveStatus};
use crate::nn::BoxFrame;
use crate::par;

/// Lattice samples used to estimate the feasible fraction.
pub const FEASIBILITY_SAMPLES: usize = 100_000;
pub const MIN_FEASIBLE_FRACTION: f64 = 0.01;
pub const MAX_FEASIBLE_FRACTION: f64 = 0.99;
const MAX_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcSpec {
    pub n: usize,
    pub m: usize,
    pub box_kind: BoxKind,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl RcSpec {
    pub fn new(m: usize, box_kind: BoxKind, seed: u64) -> Self {
        Self {
            n: 16,
            m,
            box_kind,
            train_size: 1600,
            test_size: 1000,
            seed,
        }
    }
}

/// Share of uniformly drawn box points that satisfy every row of `truth`.
pub fn feasible_fraction<R: Rng + ?Sized>(truth: &ConstraintTruth, samples: usize, rng: &mut R) -> f64 {
    let inst = truth.instance(&vec![0.0; truth.box_low.len()]);
    let mut y = vec![0i64; truth.box_low.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (i, v) in y.iter_mut().enumerate() {
            *v = rng.random_range(truth.box_low[i]..=truth.box_high[i]);
        }
        hits += usize::from(inst.is_feasible(&y));
    }
    hits as f64 / samples as f64
}

fn draw_truth(spec: &RcSpec, rng: &mut ChaCha8Rng) -> ConstraintTruth {
    let mut set = ConstraintSet::random_init(spec.n, spec.m, ParamMode::LearnableOrigins, rng);
    for c in &mut set.constraints {
        if dot(&c.normal, &c.origin) > c.bias() {
            c.normal.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let (a, b) = set.to_matrix_form();
    let (lo, hi) = spec.box_kind.bounds();
    let frame = BoxFrame::new(&vec![lo; spec.n], &vec![hi; spec.n]);
    let (a_int, b_int) = frame.constraints_to_integer(&a, &b);
    ConstraintTruth {
        constraint_matrix: a_int,
        bias: b_int,
        sense: vec![RowSense::Le; spec.m],
        box_low: frame.low.clone(),
        box_high: frame.high.clone(),
    }
}

pub fn generate_rc(spec: &RcSpec) -> Result<Dataset> {
    if spec.n == 0 || spec.m == 0 {
        return Err(Error::Generation("RC needs n >= 1 and m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = None;
    for _ in 0..MAX_ATTEMPTS {
        let t = draw_truth(spec, &mut rng);
        let frac = feasible_fraction(&t, FEASIBILITY_SAMPLES, &mut rng);
        if (MIN_FEASIBLE_FRACTION..=MAX_FEASIBLE_FRACTION).contains(&frac) {
            truth = Some(t);
            break;
        }
    }
    let truth = truth.ok_or_else(|| {
        Error::Generation(format!("no admissible constraints after {MAX_ATTEMPTS} draws"))
    })?;

    let costs: Vec<Vec<f64>> = (0..spec.train_size + spec.test_size)
        .map(|_| random_unit_vector(spec.n, &mut rng))
        .collect();
    let mut items = par::try_map(&costs, |c| {
        let res = solve_ilp(&truth.instance(c))?;
        if res.status != SolveStatus::Optimal {
            return Err(Error::Generation("labelled instance is infeasible".into()));
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
        spec: DatasetSpec::Rc(spec.clone()),
        ground_truth: GroundTruth::Constraints(truth),
        train: items,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small(m: usize, kind: BoxKind, seed: u64) -> RcSpec {
        RcSpec {
            train_size: 60,
            test_size: 40,
            ..RcSpec::new(m, kind, seed)
        }
    }

    #[test]
    fn labels_are_feasible_and_varied() {
        for kind in [BoxKind::Binary, BoxKind::Dense] {
            let ds = generate_rc(&small(1, kind, 3)).unwrap();
            assert_eq!((ds.train.len(), ds.test.len()), (60, 40));
            for it in ds.train.iter().chain(&ds.test) {
                let inst = ds.instance(it);
                assert!(inst.in_box(&it.label) && inst.is_feasible(&it.label));
                assert!((it.input.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let distinct: HashSet<_> = ds.train.iter().map(|it| it.label.clone()).collect();
            assert!(distinct.len() > 1);
        }
    }

    #[test]
    fn feasible_fraction_is_in_band() {
        let ds = generate_rc(&small(4, BoxKind::Dense, 9)).unwrap();
        let GroundTruth::Constraints(t) = &ds.ground_truth else { panic!() };
        let f = feasible_fraction(t, 20_000, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(f > 0.005 && f < 0.995, "{f}");
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = generate_rc(&small(2, BoxKind::Binary, 5)).unwrap();
        let b = generate_rc(&small(2, BoxKind::Binary, 5)).unwrap();
        assert_eq!(a, b);
        let c = generate_rc(&small(2, BoxKind::Binary, 6)).unwrap();
        assert_ne!(a, c);
    }
}
