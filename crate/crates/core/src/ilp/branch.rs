//! Best-bound branch-and-bound with lexicographic tie resolution.
//!
//! Nodes carry their own solved [`DualSimplex`]; children clone it, tighten
//! one or more bounds and re-optimize. Branching is on the most fractional
//! integer variable.
//!
//! When `tie_break` is set the search returns, among all integer points whose
//! objective is within [`TIE_TOL`] of the optimum, the lexicographically
//! smallest one. An integral LP optimum `p` at a node does not close the node
//! in that mode: the points of the node that precede `p` lexicographically
//! are split off into at most `n` children (`y_j = p_j` for `j < i`,
//! `y_i <= p_i - 1`) and searched as well. Those children are almost always
//! pruned by bound straight away.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::simplex::{DualSimplex, LpModel, LpOutcome};
use super::{INTEGRALITY_TOL, TIE_TOL};

/// Slack on top of the tie window before a node is discarded by bound; covers
/// the round-off in LP objective values.
const PRUNE_SLACK: f64 = 1e-7;

pub(crate) struct MipOutcome {
    pub point: Vec<i64>,
    pub objective: f64,
    pub nodes: u64,
}

struct Node {
    lp: DualSimplex,
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap; smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<F> {
    n_int: usize,
    tie_break: bool,
    eval: F,
    heap: BinaryHeap<Node>,
    seq: u64,
    nodes: u64,
    best: f64,
    candidates: Vec<(f64, Vec<i64>)>,
}

impl<F> Search<F>
where
    F: Fn(&[i64]) -> Option<f64>,
{
    fn cutoff(&self) -> f64 {
        if self.tie_break {
            self.best + TIE_TOL + PRUNE_SLACK
        } else {
            self.best - TIE_TOL
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        if self.tie_break {
            bound > self.cutoff()
        } else {
            bound >= self.cutoff()
        }
    }

    /// Solves `lp` and queues it unless it is infeasible or bounded out.
    fn push(&mut self, mut lp: DualSimplex) -> Result<()> {
        match lp.solve()? {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => return Ok(()),
            LpOutcome::Unbounded => {
                return Err(Error::InvalidInstance(
                    "LP relaxation is unbounded; every variable needs finite bounds".into(),
                ))
            }
        }
        let x = lp.values();
        let bound = lp.objective_at(&x);
        if self.prunable(bound) {
            return Ok(());
        }
        self.seq += 1;
        self.heap.push(Node {
            lp,
            bound,
            seq: self.seq,
        });
        Ok(())
    }

    fn branch_child(&mut self, parent: &DualSimplex, fixes: &[(usize, f64, f64)]) -> Result<()> {
        let mut lp = parent.clone();
        for &(j, lo, hi) in fixes {
            if !lp.tighten(j, lo, hi) {
                return Ok(());
            }
        }
        self.push(lp)
    }

    /// Children covering every point of the node that is lexicographically
    /// smaller than `p` (and, with `skip_p`, every larger one too).
    fn split_around(&mut self, lp: &DualSimplex, p: &[i64], skip_p: bool) -> Result<()> {
        let mut prefix: Vec<(usize, f64, f64)> = Vec::with_capacity(self.n_int);
        for (i, &pi) in p.iter().enumerate() {
            let (lo, hi) = lp.bounds(i);
            let v = pi as f64;
            if lo < v {
                let mut fixes = prefix.clone();
                fixes.push((i, f64::NEG_INFINITY, v - 1.0));
                self.branch_child(lp, &fixes)?;
            }
            if skip_p && v < hi {
                let mut fixes = prefix.clone();
                fixes.push((i, v + 1.0, f64::INFINITY));
                self.branch_child(lp, &fixes)?;
            }
            prefix.push((i, v, v));
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        while let Some(node) = self.heap.pop() {
            self.nodes += 1;
            if self.prunable(node.bound) {
                if self.tie_break {
                    continue;
                }
                // Best-bound order: nothing left can improve.
                break;
            }
            let x = node.lp.values();

            let mut branch_var = None;
            let mut widest = INTEGRALITY_TOL;
            for (i, &xi) in x[..self.n_int].iter().enumerate() {
                let frac = xi - xi.floor();
                let dist = frac.min(1.0 - frac);
                if dist > widest {
                    widest = dist;
                    branch_var = Some(i);
                }
            }

            if let Some(i) = branch_var {
                let v = x[i];
                self.branch_child(&node.lp, &[(i, f64::NEG_INFINITY, v.floor())])?;
                self.branch_child(&node.lp, &[(i, v.ceil(), f64::INFINITY)])?;
                continue;
            }

            let p: Vec<i64> = x[..self.n_int].iter().map(|v| v.round() as i64).collect();
            match (self.eval)(&p) {
                Some(obj) => {
                    if obj < self.best {
                        self.best = obj;
                        let keep = self.best + TIE_TOL;
                        self.candidates.retain(|(o, _)| *o <= keep);
                    }
                    if self.tie_break {
                        if obj <= self.best + TIE_TOL {
                            self.candidates.push((obj, p.clone()));
                        }
                        self.split_around(&node.lp, &p, false)?;
                    } else if obj <= self.best {
                        self.candidates.clear();
                        self.candidates.push((obj, p));
                    }
                }
                // The LP optimum rounds to a point the exact check rejects;
                // carve that point out and keep searching the rest of the node.
                None => self.split_around(&node.lp, &p, true)?,
            }
        }
        Ok(())
    }
}

/// Minimizes `model` over points whose first `n_int` variables are integral.
///
/// `eval` maps a candidate integer point to its exact objective, or `None`
/// when the point must be rejected. Returns `None` when no point is accepted.
pub(crate) fn branch_and_bound<F>(
    model: &LpModel,
    n_int: usize,
    tie_break: bool,
    eval: F,
) -> Result<(Option<MipOutcome>, u64)>
where
    F: Fn(&[i64]) -> Option<f64>,
{
    let mut search = Search {
        n_int,
        tie_break,
        eval,
        heap: BinaryHeap::new(),
        seq: 0,
        nodes: 0,
        best: f64::INFINITY,
        candidates: Vec::new(),
    };
    search.push(DualSimplex::new(model))?;
    search.run()?;

    let best = search.best;
    let nodes = search.nodes;
    let winner = search
        .candidates
        .into_iter()
        .filter(|(o, _)| *o <= best + TIE_TOL)
        .min_by(|a, b| a.1.cmp(&b.1));
    Ok((
        winner.map(|(objective, point)| MipOutcome {
            point,
            objective,
            nodes,
        }),
        nodes,
    ))
}
