//! Bounded-variable dual simplex on a dense tableau.
//!
//! The LP is `min c·x` subject to `G x <= h` and `l <= x <= u`. Every
//! structural variable must have a finite bound on the side its cost pushes
//! it towards, so the starting basis (all slacks basic, each structural at the
//! cheaper bound) is dual feasible and no phase one is needed. Branching only
//! tightens bounds, which keeps a parent's optimal basis dual feasible; child
//! nodes clone the parent tableau and continue from there.
//!
//! Pivoting uses Bland's rule in its dual form: the leaving row is the
//! infeasible basic variable with the smallest index, and ties in the ratio
//! test go to the smallest column index.

use crate::error::{Error, Result};

use super::{FEASIBILITY_TOL, PIVOT_TOL};

#[derive(Clone, Debug)]
pub(crate) struct LpModel {
    pub cost: Vec<f64>,
    /// Row-major `m × nvar`.
    pub rows: Vec<f64>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Clone, Debug)]
pub(crate) struct DualSimplex {
    m: usize,
    nvar: usize,
    ncol: usize,
    /// `B^-1 [G I]`, row-major `m × ncol`.
    tab: Vec<f64>,
    /// `B^-1 h`.
    beta: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    /// Set when the starting point cannot be made dual feasible.
    unbounded: bool,
}

impl DualSimplex {
    pub fn new(model: &LpModel) -> Self {
        let m = model.num_rows();
        let nvar = model.num_vars();
        let ncol = nvar + m;

        let mut tab = vec![0.0; m * ncol];
        for r in 0..m {
            let row = &mut tab[r * ncol..(r + 1) * ncol];
            row[..nvar].copy_from_slice(&model.rows[r * nvar..(r + 1) * nvar]);
            row[nvar + r] = 1.0;
        }

        let mut lower = model.lower.clone();
        let mut upper = model.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));

        let mut cost = model.cost.clone();
        cost.extend(std::iter::repeat_n(0.0, m));

        let mut unbounded = false;
        let mut state = Vec::with_capacity(ncol);
        for j in 0..nvar {
            if cost[j] >= 0.0 {
                unbounded |= !lower[j].is_finite() && cost[j] > 0.0;
                state.push(VarState::AtLower);
            } else {
                unbounded |= !upper[j].is_finite();
                state.push(VarState::AtUpper);
            }
        }
        state.extend(std::iter::repeat_n(VarState::Basic, m));

        Self {
            m,
            nvar,
            ncol,
            tab,
            beta: model.rhs.clone(),
            reduced: cost.clone(),
            basis: (nvar..ncol).collect(),
            state,
            lower,
            upper,
            cost,
            unbounded,
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Intersects the bounds of structural `j` with `[lo, hi]`. Returns false
    /// if the resulting interval is empty.
    pub fn tighten(&mut self, j: usize, lo: f64, hi: f64) -> bool {
        self.lower[j] = self.lower[j].max(lo);
        self.upper[j] = self.upper[j].min(hi);
        self.lower[j] <= self.upper[j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic => 0.0,
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
        }
    }

    fn basic_values(&self) -> Vec<f64> {
        let nb: Vec<f64> = (0..self.ncol).map(|j| self.nonbasic_value(j)).collect();
        (0..self.m)
            .map(|r| {
                let row = &self.tab[r * self.ncol..(r + 1) * self.ncol];
                let mut acc = self.beta[r];
                for (t, v) in row.iter().zip(&nb) {
                    acc -= t * v;
                }
                acc
            })
            .collect()
    }

    pub fn solve(&mut self) -> Result<LpOutcome> {
        if self.unbounded {
            return Ok(LpOutcome::Unbounded);
        }
        let max_iter = 200 * (self.ncol + self.m) + 1000;
        for _ in 0..max_iter {
            let xb = self.basic_values();

            // Leaving variable: smallest index among primal-infeasible basics.
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_var = usize::MAX;
            for (r, &v) in self.basis.iter().enumerate() {
                let below = xb[r] < self.lower[v] - FEASIBILITY_TOL;
                let above = xb[r] > self.upper[v] + FEASIBILITY_TOL;
                if (below || above) && v < leave_var {
                    leave_var = v;
                    leave = Some((r, below));
                }
            }
            let Some((r, below)) = leave else {
                return Ok(LpOutcome::Optimal);
            };

            let row = &self.tab[r * self.ncol..(r + 1) * self.ncol];
            let mut enter = None;
            let mut best_ratio = f64::INFINITY;
            for (j, &alpha) in row.iter().enumerate() {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_B = beta - alpha x_j: raising x_B needs alpha < 0 for a
                // variable that can increase, alpha > 0 for one that can decrease.
                let eligible = match (below, st) {
                    (true, VarState::AtLower) => alpha < 0.0,
                    (true, VarState::AtUpper) => alpha > 0.0,
                    (false, VarState::AtLower) => alpha > 0.0,
                    (false, VarState::AtUpper) => alpha < 0.0,
                    _ => false,
                };
                if !eligible {
                    continue;
                }
                let ratio = (self.reduced[j] / alpha).abs();
                if ratio < best_ratio - 1e-12 {
                    best_ratio = ratio;
                    enter = Some(j);
                }
            }
            let Some(q) = enter else {
                return Ok(LpOutcome::Infeasible);
            };

            let p = self.basis[r];
            self.pivot(r, q);
            self.state[p] = if below {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
        }
        Err(Error::SimplexStalled(max_iter))
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.tab[r * ncol + q];
        {
            let row = &mut self.tab[r * ncol..(r + 1) * ncol];
            for t in row.iter_mut() {
                *t /= piv;
            }
            row[q] = 1.0;
        }
        self.beta[r] /= piv;

        let (pivot_row, beta_r) = (self.tab[r * ncol..(r + 1) * ncol].to_vec(), self.beta[r]);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * ncol + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * ncol..(i + 1) * ncol];
            for (t, pr) in row.iter_mut().zip(&pivot_row) {
                *t -= f * pr;
            }
            row[q] = 0.0;
            self.beta[i] -= f * beta_r;
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pr;
            }
        }
        self.reduced[q] = 0.0;

        self.state[q] = VarState::Basic;
        self.basis[r] = q;
    }

    /// Values of the structural variables at the current basis.
    pub fn values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.nvar).map(|j| self.nonbasic_value(j)).collect();
        let xb = self.basic_values();
        for (r, &v) in self.basis.iter().enumerate() {
            if v < self.nvar {
                x[v] = xb[r];
            }
        }
        x
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.cost).map(|(a, b)| a * b).sum()
    }
}
