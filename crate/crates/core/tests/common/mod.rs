//! Helpers shared by the integration tests.
#![allow(dead_code)]

use combopt::comboptnet::hyperplane_distance;
use combopt::ilp::{IlpInstance, RowSense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random instance with coefficients on a coarse grid so that objective ties
/// and exactly active rows are common.
pub fn random_instance<R: Rng>(rng: &mut R, dense: bool) -> IlpInstance {
    let (n, lo, hi) = if dense {
        match rng.random_range(0..3) {
            0 => (rng.random_range(1..=4), -5, 5),
            1 => (rng.random_range(1..=7), -2, 2),
            _ => (rng.random_range(1..=9), -1, 1),
        }
    } else {
        (rng.random_range(1..=12), 0, 1)
    };
    let m = rng.random_range(0..=8);
    let grid = |rng: &mut R, span: i32| rng.random_range(-span..=span) as f64 / 2.0;
    let cost = (0..n).map(|_| grid(rng, 6)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut bias = Vec::with_capacity(m);
    let mut sense = Vec::with_capacity(m);
    for _ in 0..m {
        rows.push((0..n).map(|_| grid(rng, 4)).collect());
        bias.push(grid(rng, 6) + if dense { 0.0 } else { 1.0 });
        sense.push(if rng.random_bool(0.25) {
            RowSense::Ge
        } else {
            RowSense::Le
        });
    }
    IlpInstance::new(cost, rows, bias, vec![lo; n], vec![hi; n]).with_sense(sense)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Best total price of a 0/1 knapsack by a Pareto-frontier dynamic program
/// over (weight, price) pairs; exact for real-valued weights.
pub fn knapsack_dp(weights: &[f64], prices: &[f64], capacity: f64) -> f64 {
    let mut front: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for (&w, &p) in weights.iter().zip(prices) {
        let mut next = front.clone();
        next.extend(front.iter().filter(|s| s.0 + w <= capacity).map(|s| (s.0 + w, s.1 + p)));
        next.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let mut pruned: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        for s in next {
            if pruned.last().is_none_or(|l| s.1 > l.1) {
                pruned.push(s);
            }
        }
        front = pruned;
    }
    front.iter().map(|s| s.1).fold(0.0, f64::max)
}

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_diff(x: &[f64], i: usize, h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut p = x.to_vec();
    let mut q = x.to_vec();
    p[i] += h;
    q[i] -= h;
    (f(&p) - f(&q)) / (2.0 * h)
}

/// Passes when both values are tiny or their relative error is below `tol`.
pub fn grad_close(analytic: f64, numeric: f64, tol: f64) -> bool {
    (analytic - numeric).abs() < 1e-8 || rel_err(analytic, numeric) < tol
}

/// Minimum distance of sampled points to every hyperplane, and between
/// distinct row distances.
pub const MARGIN: f64 = 1e-3;

pub fn reals(y: &[i64]) -> Vec<f64> {
    y.iter().map(|&v| v as f64).collect()
}

pub fn excess(a: &[f64], b: f64, y: &[f64]) -> f64 {
    a.iter().zip(y).map(|(x, z)| x * z).sum::<f64>() - b
}

/// Random rows, a point `y` and a box neighbour `y'`, all at least `MARGIN`
/// away from every hyperplane.
pub struct Config {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub y: Vec<i64>,
    pub y_prime: Vec<i64>,
    pub low: Vec<i64>,
    pub high: Vec<i64>,
}

pub fn random_config(rng: &mut ChaCha8Rng) -> Config {
    loop {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=4);
        let r = if rng.random_bool(0.5) { 1 } else { 3 };
        let low = vec![if r == 1 { 0 } else { -r }; n];
        let high = vec![r; n];
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..2.0)).collect();
        let y: Vec<i64> = (0..n).map(|i| rng.random_range(low[i]..=high[i])).collect();
        let y_prime: Vec<i64> = y.iter().map(|&v| v + rng.random_range(-1..=1)).collect();
        if y_prime == y || y_prime.iter().zip(&low).zip(&high).any(|((v, l), h)| v < l || v > h) {
            continue;
        }
        let clear = |p: &[i64]| a.iter().zip(&b).all(|(row, &bj)| excess(row, bj, &reals(p)).abs() > MARGIN);
        if !clear(&y) || !clear(&y_prime) {
            continue;
        }
        let mut d: Vec<f64> = a.iter().zip(&b).map(|(row, &bj)| hyperplane_distance(row, bj, &reals(&y))).collect();
        d.sort_by(f64::total_cmp);
        if d.windows(2).any(|w| w[1] - w[0] < MARGIN) {
            continue;
        }
        return Config { a, b, y, y_prime, low, high };
    }
}

