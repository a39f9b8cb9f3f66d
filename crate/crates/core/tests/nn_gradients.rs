mod common;

use combopt::nn::{loss_and_gradient, normalize_cost, normalize_cost_backward, Adam, LossKind, Mlp, OutputScale, HUBER_BETA};
use common::{central_diff, grad_close};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

fn weighted_output(mlp: &Mlp, x: &[f64], r: &[f64]) -> f64 {
    mlp.predict(x).unwrap().iter().zip(r).map(|(o, w)| o * w).sum()
}

#[test]
fn mlp_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let dims = [rng.random_range(1..=6), rng.random_range(2..=8), rng.random_range(2..=5), 2];
        let scale = (case % 2 == 0).then(|| OutputScale { lo: vec![15.0, 10.0], hi: vec![35.0, 45.0] });
        let mut mlp = Mlp::new(&dims, scale, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();

        let cache = mlp.forward(&x).unwrap();
        let mut grad = vec![0.0; mlp.num_params()];
        let dx = mlp.backward(&cache, &r, &mut grad);

        for (i, g) in dx.iter().enumerate() {
            let num = central_diff(&x, i, H, |q| weighted_output(&mlp, q, &r));
            assert!(grad_close(*g, num, 1e-4), "case {case} input {i}: {g} vs {num}");
        }
        let params = mlp.params.clone();
        for (i, g) in grad.iter().enumerate() {
            let mut num_at = |p: &[f64]| {
                mlp.params.copy_from_slice(p);
                weighted_output(&mlp, &x, &r)
            };
            let mut p = params.clone();
            p[i] += H;
            let up = num_at(&p);
            p[i] -= 2.0 * H;
            let down = num_at(&p);
            let num = (up - down) / (2.0 * H);
            assert!(grad_close(*g, num, 1e-4), "case {case} param {i}: {g} vs {num}");
        }
        mlp.params = params;
    }
}

#[test]
fn mlp_backward_accumulates() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mlp = Mlp::new(&[3, 4, 2], None, &mut rng);
    let cache = mlp.forward(&[0.1, -0.2, 0.3]).unwrap();
    let mut once = vec![0.0; mlp.num_params()];
    mlp.backward(&cache, &[1.0, -1.0], &mut once);
    let mut twice = vec![0.0; mlp.num_params()];
    mlp.backward(&cache, &[1.0, -1.0], &mut twice);
    mlp.backward(&cache, &[1.0, -1.0], &mut twice);
    for (a, b) in once.iter().zip(&twice) {
        assert!((2.0 * a - b).abs() < 1e-15);
    }
}

#[test]
fn losses_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in [LossKind::Mse, LossKind::L1, LossKind::Huber] {
        let mut checked = 0;
        while checked < 100 {
            let n = rng.random_range(1..=10);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let kinked = y.iter().zip(&t).any(|(a, b)| {
                let e = (a - b).abs();
                e < 1e-3 || (e - HUBER_BETA).abs() < 1e-3
            });
            if kinked {
                continue;
            }
            let (_, g) = loss_and_gradient(kind, &y, &t);
            for (i, gi) in g.iter().enumerate() {
                let num = central_diff(&y, i, H, |q| loss_and_gradient(kind, q, &t).0);
                assert!(grad_close(*gi, num, 1e-4), "{kind:?} coord {i}");
            }
            checked += 1;
        }
    }
}

#[test]
fn l0_counts_mismatches() {
    let (l, g) = loss_and_gradient(LossKind::L0, &[0.5, -0.5, 0.5, 0.5], &[0.5, 0.5, -0.5, 0.5]);
    assert_eq!(l, 0.5);
    assert_eq!(g, vec![0.0, -0.25, 0.25, 0.0]);
}

#[test]
fn cost_normalization_backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let n = rng.random_range(1..=10);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |q: &[f64]| normalize_cost(q).iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
        for (i, g) in normalize_cost_backward(&c, &r).iter().enumerate() {
            assert!(grad_close(*g, central_diff(&c, i, H, f), 1e-4));
        }
    }
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    let mut adam = Adam::new(3, 0.01);
    let mut p = vec![1.0, 1.0, 1.0];
    adam.step(&mut p, &[2.0, -0.001, 0.0]);
    assert!((p[0] - 0.99).abs() < 1e-9);
    assert!((p[1] - 1.01).abs() < 1e-6);
    assert_eq!(p[2], 1.0);
}

#[test]
fn adam_minimizes_a_quadratic() {
    let mut adam = Adam::new(2, 0.05);
    let mut p = vec![3.0, -2.0];
    for _ in 0..2000 {
        let g = [2.0 * (p[0] - 1.0), 2.0 * (p[1] + 0.5)];
        adam.step(&mut p, &g);
    }
    assert!((p[0] - 1.0).abs() < 1e-3 && (p[1] + 0.5).abs() < 1e-3);
}
