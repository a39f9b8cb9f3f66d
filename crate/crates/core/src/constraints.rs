//! Learnable hyperplane constraints `a_k·x <= b_k` with `b_k = r_k - a_k·o_k`.
//!
//! Each constraint has a normal `a_k`, a radius `r_k` and an origin `o_k`.
//! The parameters live in the normalized frame `[-0.5, 0.5]^n`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normals shorter than this are treated as degenerate.
pub const EPS_NORM: f64 = 1e-8;
/// Initial radius of every learnable constraint.
pub const INIT_RADIUS: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamConstraint {
    pub normal: Vec<f64>,
    pub radius: f64,
    pub origin: Vec<f64>,
}

impl ParamConstraint {
    pub fn bias(&self) -> f64 {
        self.radius - dot(&self.normal, &self.origin)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    #[default]
    LearnableOrigins,
    /// Origins pinned to the lower corner `(-0.5, ..., -0.5)`.
    DirectOriginCorner,
    /// Origins pinned to the box center.
    DirectOriginCenter,
}

impl ParamMode {
    pub fn learns_origins(self) -> bool {
        self == ParamMode::LearnableOrigins
    }

    /// Fixed origin of the direct modes.
    pub fn fixed_origin(self, n: usize) -> Option<Vec<f64>> {
        match self {
            ParamMode::LearnableOrigins => None,
            ParamMode::DirectOriginCorner => Some(vec![-0.5; n]),
            ParamMode::DirectOriginCenter => Some(vec![0.0; n]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub constraints: Vec<ParamConstraint>,
    pub mode: ParamMode,
}

/// Gradient with respect to one [`ParamConstraint`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrad {
    pub normal: Vec<f64>,
    pub radius: f64,
    pub origin: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConstraintSet {
    pub fn new(constraints: Vec<ParamConstraint>, mode: ParamMode) -> Result<Self> {
        let set = Self { constraints, mode };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for (k, c) in self.constraints.iter().enumerate() {
            if c.normal.len() != n || c.origin.len() != n {
                return Err(Error::Shape(format!(
                    "constraint {k} has dimension {}/{}, expected {n}",
                    c.normal.len(),
                    c.origin.len()
                )));
            }
            let finite = c.radius.is_finite()
                && c.normal.iter().chain(&c.origin).all(|v| v.is_finite());
            if !finite {
                return Err(Error::Diverged(format!("constraint {k} has non-finite parameters")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.constraints.first().map_or(0, |c| c.normal.len())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Uniform random unit normals, origins uniform in `[-0.25, 0.25]^n` (or
    /// the mode's fixed origin), radii [`INIT_RADIUS`].
    pub fn random_init<R: Rng + ?Sized>(n: usize, m: usize, mode: ParamMode, rng: &mut R) -> Self {
        let constraints = (0..m)
            .map(|_| ParamConstraint {
                normal: random_unit_vector(n, rng),
                radius: INIT_RADIUS,
                origin: mode
                    .fixed_origin(n)
                    .unwrap_or_else(|| (0..n).map(|_| rng.random_range(-0.25..=0.25)).collect()),
            })
            .collect();
        Self { constraints, mode }
    }

    /// Row `k` of `A` is `a_k`; `b_k = r_k - a_k·o_k`.
    pub fn to_matrix_form(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let a = self.constraints.iter().map(|c| c.normal.clone()).collect();
        let b = self.constraints.iter().map(ParamConstraint::bias).collect();
        (a, b)
    }

    /// Chain rule through `b = r - a·o`. Direct modes report zero origin
    /// gradients.
    pub fn pull_back_gradients(&self, da: &[Vec<f64>], db: &[f64]) -> Result<Vec<ParamGrad>> {
        if da.len() != self.len() || db.len() != self.len() {
            return Err(Error::Shape(format!(
                "gradient has {}/{} rows for {} constraints",
                da.len(),
                db.len(),
                self.len()
            )));
        }
        self.constraints
            .iter()
            .zip(da.iter().zip(db))
            .map(|(c, (dak, &dbk))| {
                if dak.len() != c.normal.len() {
                    return Err(Error::Shape("gradient row length mismatch".into()));
                }
                let normal = dak.iter().zip(&c.origin).map(|(g, o)| g - dbk * o).collect();
                let origin = if self.mode.learns_origins() {
                    c.normal.iter().map(|a| -dbk * a).collect()
                } else {
                    vec![0.0; c.origin.len()]
                };
                Ok(ParamGrad {
                    normal,
                    radius: dbk,
                    origin,
                })
            })
            .collect()
    }

    /// Number of trainable scalars.
    pub fn num_params(&self) -> usize {
        let per = |c: &ParamConstraint| {
            c.normal.len() + 1 + if self.mode.learns_origins() { c.origin.len() } else { 0 }
        };
        self.constraints.iter().map(per).sum()
    }

    /// Trainable parameters in a fixed order: per constraint normal, radius,
    /// then origin if learnable.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for c in &self.constraints {
            out.extend(&c.normal);
            out.push(c.radius);
            if self.mode.learns_origins() {
                out.extend(&c.origin);
            }
        }
        out
    }

    /// Inverse of [`Self::flatten`].
    pub fn unflatten(&mut self, params: &[f64]) {
        let learn = self.mode.learns_origins();
        let mut it = params.iter().copied();
        for c in &mut self.constraints {
            for v in c.normal.iter_mut() {
                *v = it.next().expect("parameter vector too short");
            }
            c.radius = it.next().expect("parameter vector too short");
            if learn {
                for v in c.origin.iter_mut() {
                    *v = it.next().expect("parameter vector too short");
                }
            }
        }
    }

    /// Gradients laid out like [`Self::flatten`].
    pub fn flatten_grads(&self, grads: &[ParamGrad]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for g in grads {
            out.extend(&g.normal);
            out.push(g.radius);
            if self.mode.learns_origins() {
                out.extend(&g.origin);
            }
        }
        out
    }
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
