//! Gradients of an ILP solution with respect to `(A, b, c)`.
//!
//! The incoming gradient is split into integer directions `Δ_k` with weights
//! `λ_k >= 0`. For each direction the neighbouring point `y'_k = y + Δ_k` is
//! inspected: if it is feasible the cost and the closest constraints are
//! blamed, if it is infeasible the rows it violates are. The mismatch values
//! `P_Δk` are piecewise affine in `(A, b, c)` and their derivatives, weighted
//! by `λ_k`, form the outgoing gradient.
//!
//! [`backward`] takes `dy = ∂L/∂y` and decomposes the descent direction
//! `-dy`, so that the returned triple is a gradient: subtracting it moves the
//! solver output towards `y - dy`.

use serde::{Deserialize, Serialize};

use crate::constraints::EPS_NORM;
use crate::error::{Error, Result};
use crate::ilp::{solve_ilp, IlpInstance, SolveResult};

/// Coordinates of `dy` at or below this magnitude are dropped.
pub const ZERO_TOL: f64 = 1e-12;
/// Slack in the feasibility test for `y'_k`.
pub const FEAS_TOL: f64 = 1e-9;

/// Smoothing of the minimum over row distances. Serialized as `"hard"` or
/// as the temperature itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemperatureRepr", into = "TemperatureRepr")]
pub enum Temperature {
    Hard,
    Soft(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TemperatureRepr {
    Name(String),
    Value(f64),
}

impl From<Temperature> for TemperatureRepr {
    fn from(t: Temperature) -> Self {
        match t {
            Temperature::Hard => TemperatureRepr::Name("hard".into()),
            Temperature::Soft(v) => TemperatureRepr::Value(v),
        }
    }
}

impl TryFrom<TemperatureRepr> for Temperature {
    type Error = String;

    fn try_from(r: TemperatureRepr) -> std::result::Result<Self, String> {
        match r {
            TemperatureRepr::Name(s) if s == "hard" => Ok(Temperature::Hard),
            TemperatureRepr::Value(v) if v > 0.0 && v.is_finite() => Ok(Temperature::Soft(v)),
            TemperatureRepr::Name(s) => Err(format!("unknown temperature {s:?}")),
            TemperatureRepr::Value(v) => Err(format!("temperature must be positive, got {v}")),
        }
    }
}

impl std::fmt::Display for Temperature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Temperature::Hard => f.write_str("hard"),
            Temperature::Soft(v) => write!(f, "{v}"),
        }
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature::Soft(0.5)
    }
}

impl Temperature {
    /// Same smoothing after lengths are multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        match self {
            Temperature::Hard => Temperature::Hard,
            Temperature::Soft(t) => Temperature::Soft(t * factor),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    #[default]
    Delta,
    Canonical,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BackwardConfig {
    pub temperature: Temperature,
    pub basis: BasisMode,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BasisDecomposition {
    pub deltas: Vec<Vec<i64>>,
    pub lambdas: Vec<f64>,
    /// Coordinates by decreasing `|dy_i|`, stable in the index.
    pub order: Vec<usize>,
}

impl BasisDecomposition {
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (d, &l) in self.deltas.iter().zip(&self.lambdas) {
            for (o, &di) in out.iter_mut().zip(d) {
                *o += l * di as f64;
            }
        }
        out
    }
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

/// `Δ_k` accumulates the signs of the `k` largest coordinates of `dy`;
/// `λ_k` is the drop in magnitude to the next coordinate.
pub fn decompose(dy: &[f64]) -> BasisDecomposition {
    let mut order: Vec<usize> = (0..dy.len()).collect();
    order.sort_by(|&i, &j| dy[j].abs().total_cmp(&dy[i].abs()));
    let ell = order.iter().take_while(|&&i| dy[i].abs() > ZERO_TOL).count();

    let mut deltas = Vec::with_capacity(ell);
    let mut lambdas = Vec::with_capacity(ell);
    let mut delta = vec![0i64; dy.len()];
    for j in 0..ell {
        let i = order[j];
        delta[i] = sign(dy[i]);
        let next = if j + 1 < ell { dy[order[j + 1]].abs() } else { 0.0 };
        deltas.push(delta.clone());
        lambdas.push(dy[i].abs() - next);
    }
    BasisDecomposition {
        deltas,
        lambdas,
        order,
    }
}

/// `Δ_k = sign(dy_k) e_k`, `λ_k = |dy_k|` in index order.
pub fn decompose_canonical(dy: &[f64]) -> BasisDecomposition {
    let mut out = BasisDecomposition::default();
    for (i, &v) in dy.iter().enumerate() {
        if v.abs() > ZERO_TOL {
            let mut d = vec![0; dy.len()];
            d[i] = sign(v);
            out.deltas.push(d);
            out.lambdas.push(v.abs());
            out.order.push(i);
        }
    }
    out
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn excess(a: &[f64], b: f64, y: &[f64]) -> f64 {
    a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>() - b
}

/// `|a·y - b| / ‖a‖`; zero for a degenerate normal.
pub fn hyperplane_distance(a: &[f64], b: f64, y: &[f64]) -> f64 {
    let na = norm(a);
    if na <= EPS_NORM {
        return 0.0;
    }
    excess(a, b, y).abs() / na
}

/// Distance with its derivatives `(d, ∂d/∂a, ∂d/∂b)`.
pub fn hyperplane_distance_grad(a: &[f64], b: f64, y: &[f64]) -> (f64, Vec<f64>, f64) {
    let na = norm(a);
    if na <= EPS_NORM {
        return (0.0, vec![0.0; a.len()], 0.0);
    }
    let s = excess(a, b, y);
    let sg = if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    };
    let d = s.abs() / na;
    let na3 = na * na * na;
    let da = a
        .iter()
        .zip(y)
        .map(|(ai, yi)| sg * yi / na - s.abs() * ai / na3)
        .collect();
    (d, da, -sg / na)
}

/// `-τ log Σ exp(-x_k/τ)`, shifted by `min(x)` for stability.
pub fn softmin(x: &[f64], tau: f64) -> f64 {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = x.iter().map(|v| (-(v - lo) / tau).exp()).sum();
    lo - tau * s.ln()
}

/// `∂ softmin / ∂x_k = exp(-x_k/τ) / Σ exp(-x_j/τ)`.
pub fn softmin_weights(x: &[f64], tau: f64) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = x.iter().map(|v| (-(v - lo) / tau).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Equal weights on the rows attaining the minimum.
fn hardmin_weights(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hits = x.iter().filter(|&&v| v <= lo).count() as f64;
    x.iter().map(|&v| if v <= lo { 1.0 / hits } else { 0.0 }).collect()
}

/// A mismatch value and its gradient with respect to `(A, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub value: f64,
    pub da: Vec<Vec<f64>>,
    pub db: Vec<f64>,
}

impl Mismatch {
    fn zero(m: usize, n: usize) -> Self {
        Self {
            value: 0.0,
            da: vec![vec![0.0; n]; m],
            db: vec![0.0; m],
        }
    }
}

fn to_real(y: &[i64]) -> Vec<f64> {
    y.iter().map(|&v| v as f64).collect()
}

fn in_box(y: &[i64], low: &[i64], high: &[i64]) -> bool {
    y.iter()
        .zip(low.iter().zip(high))
        .all(|(v, (lo, hi))| lo <= v && v <= hi)
}

/// Whether `y` satisfies every row `a_j·y <= b_j + FEAS_TOL`.
pub fn satisfies(a: &[Vec<f64>], b: &[f64], y: &[i64]) -> bool {
    let yr = to_real(y);
    a.iter().zip(b).all(|(row, &bj)| excess(row, bj, &yr) <= FEAS_TOL)
}

/// Constraint mismatch `P_Δ` for the neighbour `y_prime` of the solution `y`.
///
/// Zero if `y_prime` equals `y` or leaves the box. If it is feasible, the
/// (soft) minimum of the row distances at `y`; otherwise the summed
/// distances of `y_prime` to the rows it violates.
pub fn constraint_mismatch(
    a: &[Vec<f64>],
    b: &[f64],
    y: &[i64],
    y_prime: &[i64],
    low: &[i64],
    high: &[i64],
    temperature: Temperature,
) -> Mismatch {
    let m = b.len();
    let n = y.len();
    let mut out = Mismatch::zero(m, n);
    if y_prime == y || !in_box(y_prime, low, high) || m == 0 {
        return out;
    }
    if satisfies(a, b, y_prime) {
        let yr = to_real(y);
        let parts: Vec<_> = (0..m).map(|j| hyperplane_distance_grad(&a[j], b[j], &yr)).collect();
        let dists: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let (value, weights) = match temperature {
            Temperature::Hard => (
                dists.iter().copied().fold(f64::INFINITY, f64::min),
                hardmin_weights(&dists),
            ),
            Temperature::Soft(tau) => (softmin(&dists, tau), softmin_weights(&dists, tau)),
        };
        out.value = value;
        for (j, ((_, da, db), w)) in parts.into_iter().zip(weights).enumerate() {
            out.db[j] = w * db;
            for (o, g) in out.da[j].iter_mut().zip(da) {
                *o = w * g;
            }
        }
    } else {
        let yr = to_real(y_prime);
        for j in 0..m {
            if excess(&a[j], b[j], &yr) > FEAS_TOL {
                let (d, da, db) = hyperplane_distance_grad(&a[j], b[j], &yr);
                out.value += d;
                out.db[j] = db;
                out.da[j] = da;
            }
        }
    }
    out
}

/// Cost mismatch `c·Δ` and its gradient `Δ` when `y + Δ` is feasible and in
/// the box; zero otherwise.
pub fn cost_mismatch(c: &[f64], delta: &[i64], admissible: bool) -> (f64, Vec<f64>) {
    if !admissible {
        return (0.0, vec![0.0; c.len()]);
    }
    let grad = to_real(delta);
    let value = c.iter().zip(&grad).map(|(ci, di)| ci * di).sum();
    (value, grad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientTriple {
    pub da: Vec<Vec<f64>>,
    pub db: Vec<f64>,
    pub dc: Vec<f64>,
}

impl GradientTriple {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            da: vec![vec![0.0; n]; m],
            db: vec![0.0; m],
            dc: vec![0.0; n],
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.da
            .iter()
            .flatten()
            .chain(&self.db)
            .chain(&self.dc)
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Everything the backward pass needs from the forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedContext {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub y: Vec<i64>,
    pub low: Vec<i64>,
    pub high: Vec<i64>,
}

/// Solves `min c·y, A y <= b, y ∈ [low, high]` and keeps the inputs.
pub fn forward(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    low: Vec<i64>,
    high: Vec<i64>,
) -> Result<(SolveResult, SavedContext)> {
    let inst = IlpInstance::new(c, a, b, low, high);
    let res = solve_ilp(&inst)?;
    let ctx = SavedContext {
        a: inst.constraint_matrix,
        b: inst.bias,
        c: inst.cost,
        y: res.solution.clone(),
        low: inst.box_low,
        high: inst.box_high,
    };
    Ok((res, ctx))
}

impl SavedContext {
    pub fn backward(&self, dy: &[f64], config: &BackwardConfig) -> Result<GradientTriple> {
        backward(
            &self.a, &self.b, &self.c, &self.y, dy, &self.low, &self.high, config,
        )
    }
}

/// Gradient of the mismatch surrogate with respect to `(A, b, c)` given
/// `dy = ∂L/∂y` at the solution `y`.
#[allow(clippy::too_many_arguments)]
pub fn backward(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    y: &[i64],
    dy: &[f64],
    low: &[i64],
    high: &[i64],
    config: &BackwardConfig,
) -> Result<GradientTriple> {
    let n = y.len();
    let m = b.len();
    if dy.len() != n || c.len() != n || low.len() != n || high.len() != n || a.len() != m {
        return Err(Error::Shape(format!(
            "backward: y has {n} entries, dy {}, c {}, box {}/{}, A {} rows, b {}",
            dy.len(),
            c.len(),
            low.len(),
            high.len(),
            a.len(),
            m
        )));
    }
    if let Some(row) = a.iter().position(|r| r.len() != n) {
        return Err(Error::Shape(format!("backward: row {row} of A has wrong length")));
    }
    if !dy.iter().all(|v| v.is_finite()) {
        return Err(Error::Diverged("incoming gradient is not finite".into()));
    }

    let descent: Vec<f64> = dy.iter().map(|v| -v).collect();
    let basis = match config.basis {
        BasisMode::Delta => decompose(&descent),
        BasisMode::Canonical => decompose_canonical(&descent),
    };

    let mut out = GradientTriple::zeros(m, n);
    let mut y_prime = vec![0i64; n];
    for (delta, &lambda) in basis.deltas.iter().zip(&basis.lambdas) {
        if lambda == 0.0 {
            continue;
        }
        for ((p, yi), di) in y_prime.iter_mut().zip(y).zip(delta) {
            *p = yi + di;
        }
        let pm = constraint_mismatch(a, b, y, &y_prime, low, high, config.temperature);
        for j in 0..m {
            out.db[j] += lambda * pm.db[j];
            for (o, g) in out.da[j].iter_mut().zip(&pm.da[j]) {
                *o += lambda * g;
            }
        }
        let admissible = in_box(&y_prime, low, high) && satisfies(a, b, &y_prime);
        let (_, dc) = cost_mismatch(c, delta, admissible);
        for (o, g) in out.dc.iter_mut().zip(dc) {
            *o += lambda * g;
        }
    }
    Ok(out)
}
