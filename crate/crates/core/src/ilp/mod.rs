//! Bounded integer linear programs: `min c·y` subject to `A y <= b` (or `>=`
//! per row) with `y` integral in the box `Y = Π [low_i, high_i]`.
//!
//! [`solve_ilp`] is exact. Among optimal points it returns the
//! lexicographically smallest; objectives within [`TIE_TOL`] count as equal.
//! When the constraints exclude every lattice point of the box the result is
//! the box point of least normalized violation, flagged
//! [`SolveStatus::InfeasibleFallback`]. [`solve_brute_force`] implements the
//! same contract by enumeration and serves as the test oracle.

mod branch;
mod brute;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brute::solve_brute_force;

pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const PIVOT_TOL: f64 = 1e-9;
/// Two objective values closer than this are treated as a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Rows whose normal is shorter than this are treated as degenerate.
pub const NORM_EPS: f64 = 1e-8;
/// Largest lattice the brute-force oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSense {
    #[default]
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlpInstance {
    pub cost: Vec<f64>,
    pub constraint_matrix: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub box_low: Vec<i64>,
    pub box_high: Vec<i64>,
    pub sense: Vec<RowSense>,
}

impl IlpInstance {
    /// Instance with all rows read as `a_j·y <= b_j`.
    pub fn new(
        cost: Vec<f64>,
        constraint_matrix: Vec<Vec<f64>>,
        bias: Vec<f64>,
        box_low: Vec<i64>,
        box_high: Vec<i64>,
    ) -> Self {
        let sense = vec![RowSense::Le; bias.len()];
        Self {
            cost,
            constraint_matrix,
            bias,
            box_low,
            box_high,
            sense,
        }
    }

    /// `{0,1}^n` instance.
    pub fn binary(cost: Vec<f64>, constraint_matrix: Vec<Vec<f64>>, bias: Vec<f64>) -> Self {
        let n = cost.len();
        Self::new(cost, constraint_matrix, bias, vec![0; n], vec![1; n])
    }

    pub fn with_sense(mut self, sense: Vec<RowSense>) -> Self {
        self.sense = sense;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let m = self.num_rows();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if n == 0 {
            return bad("instance has no variables".into());
        }
        if self.box_low.len() != n || self.box_high.len() != n {
            return bad(format!(
                "box has {}/{} bounds for {n} variables",
                self.box_low.len(),
                self.box_high.len()
            ));
        }
        if self.constraint_matrix.len() != m || self.sense.len() != m {
            return bad(format!(
                "{} rows, {} senses but {m} bias entries",
                self.constraint_matrix.len(),
                self.sense.len()
            ));
        }
        if let Some(row) = self.constraint_matrix.iter().position(|r| r.len() != n) {
            return bad(format!("row {row} does not have {n} entries"));
        }
        if let Some(i) = (0..n).find(|&i| self.box_low[i] > self.box_high[i]) {
            return bad(format!(
                "empty box in coordinate {i}: [{}, {}]",
                self.box_low[i], self.box_high[i]
            ));
        }
        let finite = self.cost.iter().chain(&self.bias).all(|v| v.is_finite())
            && self.constraint_matrix.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return bad("non-finite entry in cost, matrix or bias".into());
        }
        Ok(())
    }

    /// Row `j` in `<=` form.
    fn le_row(&self, j: usize) -> (&[f64], f64, f64) {
        match self.sense[j] {
            RowSense::Le => (&self.constraint_matrix[j], self.bias[j], 1.0),
            RowSense::Ge => (&self.constraint_matrix[j], self.bias[j], -1.0),
        }
    }

    /// Signed slack excess `a_j·y - b_j` of row `j` in `<=` form.
    fn row_excess(&self, j: usize, y: &[i64]) -> f64 {
        let (a, b, s) = self.le_row(j);
        let ay: f64 = a.iter().zip(y).map(|(ai, &yi)| ai * yi as f64).sum();
        s * (ay - b)
    }

    pub fn objective(&self, y: &[i64]) -> f64 {
        self.cost.iter().zip(y).map(|(c, &yi)| c * yi as f64).sum()
    }

    pub fn in_box(&self, y: &[i64]) -> bool {
        y.len() == self.num_vars()
            && y.iter()
                .zip(self.box_low.iter().zip(&self.box_high))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    pub fn is_feasible(&self, y: &[i64]) -> bool {
        (0..self.num_rows()).all(|j| self.row_excess(j, y) <= FEASIBILITY_TOL)
    }

    /// Total violation `Σ_j max(0, a_j·y - b_j) / ‖a_j‖`. Rows with a
    /// degenerate normal are constant over the box and are skipped.
    pub fn violation(&self, y: &[i64]) -> f64 {
        (0..self.num_rows())
            .filter_map(|j| {
                let norm = norm2(&self.constraint_matrix[j]);
                (norm > NORM_EPS).then(|| self.row_excess(j, y).max(0.0) / norm)
            })
            .sum()
    }

    /// Lattice size of the box, saturating.
    pub fn lattice_size(&self) -> u128 {
        self.box_low
            .iter()
            .zip(&self.box_high)
            .fold(1u128, |acc, (&lo, &hi)| {
                acc.saturating_mul((hi - lo) as u128 + 1)
            })
    }

    fn lp_model(&self) -> simplex::LpModel {
        let n = self.num_vars();
        let mut rows = Vec::with_capacity(self.num_rows() * n);
        let mut rhs = Vec::with_capacity(self.num_rows());
        for j in 0..self.num_rows() {
            let (a, b, s) = self.le_row(j);
            rows.extend(a.iter().map(|v| s * v));
            rhs.push(s * b);
        }
        simplex::LpModel {
            cost: self.cost.clone(),
            rows,
            rhs,
            lower: self.box_low.iter().map(|&v| v as f64).collect(),
            upper: self.box_high.iter().map(|&v| v as f64).collect(),
        }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    InfeasibleFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solution: Vec<i64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub point: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
}

/// Solves the LP relaxation (integrality dropped, box kept).
pub fn solve_lp_relaxation(instance: &IlpInstance) -> Result<LpSolution> {
    instance.validate()?;
    let mut lp = simplex::DualSimplex::new(&instance.lp_model());
    let status = match lp.solve()? {
        simplex::LpOutcome::Optimal => LpStatus::Optimal,
        simplex::LpOutcome::Infeasible => LpStatus::Infeasible,
        simplex::LpOutcome::Unbounded => LpStatus::Unbounded,
    };
    let point = lp.values();
    let objective = match status {
        LpStatus::Optimal => lp.objective_at(&point),
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
    };
    Ok(LpSolution {
        point,
        objective,
        status,
    })
}

/// Exact solve by branch-and-bound.
pub fn solve_ilp(instance: &IlpInstance) -> Result<SolveResult> {
    instance.validate()?;
    let model = instance.lp_model();
    let (found, nodes) = branch::branch_and_bound(&model, instance.num_vars(), true, |y| {
        instance.is_feasible(y).then(|| instance.objective(y))
    })?;
    if let Some(out) = found {
        return Ok(SolveResult {
            solution: out.point,
            objective: out.objective,
            status: SolveStatus::Optimal,
            nodes_explored: out.nodes,
        });
    }
    let mut fallback = least_violation(instance)?;
    fallback.nodes_explored += nodes;
    Ok(fallback)
}

/// Box point minimizing [`IlpInstance::violation`], then `c·y`, then
/// lexicographic order. Two branch-and-bound passes over a model with one
/// continuous excess variable `s_j >= a_j·y - b_j, s_j >= 0` per row.
fn least_violation(instance: &IlpInstance) -> Result<SolveResult> {
    let n = instance.num_vars();
    let base = instance.lp_model();
    let m = base.num_rows();
    let weights: Vec<f64> = instance
        .constraint_matrix
        .iter()
        .map(|a| {
            let norm = norm2(a);
            if norm > NORM_EPS {
                1.0 / norm
            } else {
                0.0
            }
        })
        .collect();

    let nvar = n + m;
    let mut rows = vec![0.0; m * nvar];
    for j in 0..m {
        rows[j * nvar..j * nvar + n].copy_from_slice(&base.rows[j * n..(j + 1) * n]);
        rows[j * nvar + n + j] = -1.0;
    }
    let mut lower = base.lower.clone();
    lower.extend(std::iter::repeat_n(0.0, m));
    let mut upper = base.upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, m));

    let mut cost = vec![0.0; n];
    cost.extend(&weights);
    let phase_a = simplex::LpModel {
        cost,
        rows: rows.clone(),
        rhs: base.rhs.clone(),
        lower: lower.clone(),
        upper: upper.clone(),
    };
    let (least, nodes_a) =
        branch::branch_and_bound(&phase_a, n, false, |y| Some(instance.violation(y)))?;
    let least = least.ok_or_else(|| {
        Error::InvalidInstance("violation search found no box point".into())
    })?;
    let v_star = least.objective;

    // Phase B: cheapest point among the least-violating ones.
    let mut rows_b = rows;
    let mut budget = vec![0.0; nvar];
    budget[n..].copy_from_slice(&weights);
    rows_b.extend(budget);
    let mut rhs_b = base.rhs.clone();
    rhs_b.push(v_star + TIE_TOL + 1e-7);
    let mut cost_b = base.cost.clone();
    cost_b.extend(std::iter::repeat_n(0.0, m));
    let phase_b = simplex::LpModel {
        cost: cost_b,
        rows: rows_b,
        rhs: rhs_b,
        lower,
        upper,
    };
    let (best, nodes_b) = branch::branch_and_bound(&phase_b, n, true, |y| {
        (instance.violation(y) <= v_star + TIE_TOL).then(|| instance.objective(y))
    })?;
    let solution = best.map(|b| b.point).unwrap_or(least.point);
    Ok(SolveResult {
        objective: instance.objective(&solution),
        solution,
        status: SolveStatus::InfeasibleFallback,
        nodes_explored: nodes_a + nodes_b,
    })
}
