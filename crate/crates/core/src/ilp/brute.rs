//! Exhaustive reference solver.

use crate::error::{Error, Result};

use super::{IlpInstance, SolveResult, SolveStatus, ENUMERATION_LIMIT, TIE_TOL};

type Accept<'a> = dyn Fn(&[i64]) -> bool + 'a;

/// Visits every lattice point of the box in lexicographic order.
fn for_each_point(inst: &IlpInstance, mut visit: impl FnMut(&[i64])) {
    let n = inst.num_vars();
    let mut y = inst.box_low.clone();
    loop {
        visit(&y);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if y[i] < inst.box_high[i] {
                y[i] += 1;
                break;
            }
            y[i] = inst.box_low[i];
        }
    }
}

/// Same contract as [`super::solve_ilp`], by enumerating the whole box.
/// Refuses boxes with more than [`ENUMERATION_LIMIT`] points.
pub fn solve_brute_force(inst: &IlpInstance) -> Result<SolveResult> {
    inst.validate()?;
    let size = inst.lattice_size();
    if size > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut z_star = f64::INFINITY;
    for_each_point(inst, |y| {
        if inst.is_feasible(y) {
            z_star = z_star.min(inst.objective(y));
        }
    });

    let accept: Box<Accept<'_>>;
    let status;
    if z_star.is_finite() {
        status = SolveStatus::Optimal;
        accept = Box::new(move |y| inst.is_feasible(y) && inst.objective(y) <= z_star + TIE_TOL);
    } else {
        status = SolveStatus::InfeasibleFallback;
        let mut v_min = f64::INFINITY;
        for_each_point(inst, |y| v_min = v_min.min(inst.violation(y)));
        let mut c_min = f64::INFINITY;
        for_each_point(inst, |y| {
            if inst.violation(y) <= v_min + TIE_TOL {
                c_min = c_min.min(inst.objective(y));
            }
        });
        accept = Box::new(move |y| {
            inst.violation(y) <= v_min + TIE_TOL && inst.objective(y) <= c_min + TIE_TOL
        });
    }

    let mut found: Option<Vec<i64>> = None;
    for_each_point(inst, |y| {
        if found.is_none() && accept(y) {
            found = Some(y.to_vec());
        }
    });
    let solution = found.expect("box is non-empty");
    Ok(SolveResult {
        objective: inst.objective(&solution),
        solution,
        status,
        nodes_explored: size as u64,
    })
}
