//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use combopt::comboptnet::{
    backward, constraint_mismatch, cost_mismatch, decompose, hyperplane_distance, hyperplane_distance_grad,
    satisfies, softmin, BackwardConfig, BasisMode, Temperature,
};
use combopt::datasets::{generate, BoxKind, Dataset, DatasetSpec, KnapsackSpec, RcSpec, WscSpec};
use combopt::harness::{emit_results, run, summarize, ExperimentConfig, ModelKind};
use combopt::ilp::{solve_brute_force, solve_ilp};
use combopt::nn::{loss_and_gradient, LossKind, Mlp, OutputScale, HUBER_BETA};
use common::{central_diff, excess, grad_close, knapsack_dp, random_config, random_instance, MARGIN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Epochs for the knapsack comparison; every model gets the same budget.
const KNAPSACK_EPOCHS: usize = 10;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dataset(spec: DatasetSpec) -> Dataset {
    generate(&spec).expect("dataset generation")
}

fn rc(m: usize, kind: BoxKind, seed: u64) -> Dataset {
    dataset(DatasetSpec::Rc(RcSpec::new(m, kind, seed)))
}

fn config(model: ModelKind, seeds: &[u64]) -> ExperimentConfig {
    ExperimentConfig {
        model,
        seeds: seeds.to_vec(),
        ..ExperimentConfig::default()
    }
}

/// Mean last-epoch exact-match accuracy over the config's seeds.
fn accuracy(cfg: &ExperimentConfig, ds: &Dataset) -> f64 {
    let runs = run(cfg, ds).expect("training run");
    summarize(cfg, Some(&ds.spec), &runs).last.exact_match.mean
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

fn solver_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let start = Instant::now();
    let mut mismatches = 0;
    for k in 0..500 {
        let inst = random_instance(&mut rng, k % 2 == 1);
        let fast = solve_ilp(&inst).expect("solve_ilp");
        let slow = solve_brute_force(&inst).expect("brute force");
        if fast.solution != slow.solution || fast.status != slow.status {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 120.0, format!("{mismatches} mismatches in 500 instances, {secs:.1}s"))
}

fn random_dy(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.random_range(0..5) {
            0 => 0.0,
            1 => 0.5,
            2 => -0.5,
            _ => rng.random_range(-2.0..2.0),
        })
        .collect()
}

fn reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst = 0.0f64;
    let mut valid = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..=32);
        let dy = random_dy(&mut rng, n);
        let d = decompose(&dy);
        let r = d.reconstruct(n);
        worst = r.iter().zip(&dy).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        valid &= d.lambdas.iter().all(|&l| l >= 0.0);
        valid &= d.deltas.iter().flatten().all(|v| (-1..=1).contains(v));
    }
    outcome(worst < 1e-9 && valid, format!("max reconstruction error {worst:.1e}, basis valid: {valid}"))
}

fn homogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let cfg = random_config(&mut rng);
        let n = cfg.y.len();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dy = random_dy(&mut rng, n);
        let bc = BackwardConfig {
            temperature: if case % 2 == 0 { Temperature::Hard } else { Temperature::Soft(0.5) },
            basis: BasisMode::Delta,
        };
        let base = backward(&cfg.a, &cfg.b, &c, &cfg.y, &dy, &cfg.low, &cfg.high, &bc).expect("backward");
        for alpha in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = dy.iter().map(|v| alpha * v).collect();
            let g = backward(&cfg.a, &cfg.b, &c, &cfg.y, &scaled, &cfg.low, &cfg.high, &bc).expect("backward");
            let pairs = g
                .da
                .iter()
                .flatten()
                .zip(base.da.iter().flatten())
                .chain(g.db.iter().zip(&base.db))
                .chain(g.dc.iter().zip(&base.dc));
            for (x, y) in pairs {
                worst = worst.max((x - alpha * y).abs() / x.abs().max(1.0));
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.1e} over 200 configurations"))
}

/// Count of failing coordinates for each finite-difference family.
fn finite_differences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut failures: Vec<(&str, usize)> = Vec::new();

    let mut bad = 0;
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(1..=8);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = rng.random_range(-2.0..2.0);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3..=3) as f64).collect();
        if excess(&a, b, &y).abs() < MARGIN {
            continue;
        }
        let (_, da, db) = hyperplane_distance_grad(&a, b, &y);
        let mut p = a.clone();
        p.push(b);
        for (i, g) in da.iter().chain([&db]).enumerate() {
            let num = central_diff(&p, i, FD_STEP, |q| hyperplane_distance(&q[..n], q[n], &y));
            bad += usize::from(!grad_close(*g, num, FD_TOL));
        }
        done += 1;
    }
    failures.push(("distance", bad));

    for temperature in [Temperature::Hard, Temperature::Soft(0.5)] {
        for want_feasible in [true, false] {
            let (mut bad, mut done) = (0, 0);
            while done < 100 {
                let cfg = random_config(&mut rng);
                if satisfies(&cfg.a, &cfg.b, &cfg.y_prime) != want_feasible {
                    continue;
                }
                let (m, n) = (cfg.b.len(), cfg.y.len());
                let mm = constraint_mismatch(&cfg.a, &cfg.b, &cfg.y, &cfg.y_prime, &cfg.low, &cfg.high, temperature);
                let p: Vec<f64> = cfg.a.iter().flatten().chain(&cfg.b).copied().collect();
                let grads: Vec<f64> = mm.da.iter().flatten().chain(&mm.db).copied().collect();
                let f = |q: &[f64]| {
                    let a: Vec<Vec<f64>> = (0..m).map(|j| q[j * n..(j + 1) * n].to_vec()).collect();
                    let b = q[m * n..].to_vec();
                    constraint_mismatch(&a, &b, &cfg.y, &cfg.y_prime, &cfg.low, &cfg.high, temperature).value
                };
                for (i, g) in grads.iter().enumerate() {
                    bad += usize::from(!grad_close(*g, central_diff(&p, i, FD_STEP, f), FD_TOL));
                }
                done += 1;
            }
            let label = match (temperature, want_feasible) {
                (Temperature::Hard, true) => "mismatch/hard/feasible",
                (Temperature::Hard, false) => "mismatch/hard/infeasible",
                (_, true) => "mismatch/soft/feasible",
                (_, false) => "mismatch/soft/infeasible",
            };
            failures.push((label, bad));
        }
    }

    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let delta: Vec<i64> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
        let (_, g) = cost_mismatch(&c, &delta, true);
        for (i, gi) in g.iter().enumerate() {
            let num = central_diff(&c, i, FD_STEP, |q| cost_mismatch(q, &delta, true).0);
            bad += usize::from(!grad_close(*gi, num, FD_TOL));
        }
    }
    failures.push(("cost", bad));

    let mut bad = 0;
    for case in 0..100 {
        let dims = [rng.random_range(1..=5), rng.random_range(2..=6), 2];
        let scale = (case % 2 == 0).then(|| OutputScale { lo: vec![15.0, 10.0], hi: vec![35.0, 45.0] });
        let mlp = Mlp::new(&dims, scale, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let cache = mlp.forward(&x).expect("forward");
        let mut grad = vec![0.0; mlp.num_params()];
        mlp.backward(&cache, &r, &mut grad);
        for (i, g) in grad.iter().enumerate() {
            let num = central_diff(&mlp.params, i, FD_STEP, |q| {
                let probe = Mlp { params: q.to_vec(), ..mlp.clone() };
                let out = probe.predict(&x).expect("predict");
                out[0] * r[0] + out[1] * r[1]
            });
            bad += usize::from(!grad_close(*g, num, FD_TOL));
        }
    }
    failures.push(("mlp", bad));

    let mut bad = 0;
    for kind in [LossKind::Mse, LossKind::L1, LossKind::Huber] {
        let mut done = 0;
        while done < 100 {
            let n = rng.random_range(1..=10);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let kinked = y.iter().zip(&t).any(|(a, b)| {
                let e = (a - b).abs();
                e < MARGIN || (e - HUBER_BETA).abs() < MARGIN
            });
            if kinked {
                continue;
            }
            let (_, g) = loss_and_gradient(kind, &y, &t);
            for (i, gi) in g.iter().enumerate() {
                let num = central_diff(&y, i, FD_STEP, |q| loss_and_gradient(kind, q, &t).0);
                bad += usize::from(!grad_close(*gi, num, FD_TOL));
            }
            done += 1;
        }
    }
    failures.push(("losses", bad));

    let total: usize = failures.iter().map(|f| f.1).sum();
    let detail = failures.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
    outcome(total == 0, format!("failing coordinates: {detail}"))
}

fn softmin_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let (mut above, mut worst_gap) = (0, 0.0f64);
    for _ in 0..10_000 {
        let k = rng.random_range(1..=10);
        let x: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        above += usize::from(softmin(&x, 0.5) > lo);
        worst_gap = worst_gap.max((softmin(&x, 1e-3) - lo).abs());
    }
    outcome(
        above == 0 && worst_gap < 1e-2,
        format!("{above} vectors above min, max gap at tau=1e-3 {worst_gap:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut check = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name}: {} ({secs:.0}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o, secs));
    };

    check("AC1 solver matches enumeration", &mut solver_oracle);
    check("AC2 basis reconstruction", &mut reconstruction);
    check("AC3 backward homogeneity", &mut homogeneity);
    check("AC4 finite differences", &mut finite_differences);

    let rc_b1 = rc(1, BoxKind::Binary, 1);
    let rc_b4 = rc(4, BoxKind::Binary, 2);
    let comb = config(ModelKind::Comboptnet, &[0, 1, 2]);
    let mut comb_b1 = 0.0;
    check("AC5 rc binary m=1 accuracy", &mut || {
        comb_b1 = accuracy(&comb, &rc_b1);
        outcome(comb_b1 >= 0.90, format!("mean over 3 seeds {} (need >= 90%)", pct(comb_b1)))
    });

    let mut comb_b4 = 0.0;
    check("AC6 rc binary trend vs baselines", &mut || {
        comb_b4 = accuracy(&comb, &rc_b4);
        let mlp1 = accuracy(&config(ModelKind::Mlp, &[0, 1, 2]), &rc_b1);
        let box1 = accuracy(&config(ModelKind::BoxConstrained, &[0]), &rc_b1);
        let mlp4 = accuracy(&config(ModelKind::Mlp, &[0, 1, 2]), &rc_b4);
        let box4 = accuracy(&config(ModelKind::BoxConstrained, &[0]), &rc_b4);
        outcome(
            comb_b4 >= mlp4 + 0.10 && comb_b4 >= box4 + 0.10,
            format!(
                "m=1: comboptnet {} mlp {} box {}; m=4: comboptnet {} mlp {} box {} (need +10 points at m=4)",
                pct(comb_b1),
                pct(mlp1),
                pct(box1),
                pct(comb_b4),
                pct(mlp4),
                pct(box4)
            ),
        )
    });

    check("AC7 rc dense m=1 accuracy", &mut || {
        let acc = accuracy(&comb, &rc(1, BoxKind::Dense, 3));
        outcome(acc >= 0.75, format!("mean over 3 seeds {} (need >= 75%)", pct(acc)))
    });

    check("AC8 wsc m=4 accuracy", &mut || {
        let ds = dataset(DatasetSpec::Wsc(WscSpec::new(4, 4)));
        let acc = accuracy(&comb, &ds);
        let boxed = accuracy(&config(ModelKind::BoxConstrained, &[0]), &ds);
        outcome(
            acc >= 0.95 && boxed == 0.0,
            format!("comboptnet {} (need >= 95%), box {} (need exactly 0)", pct(acc), pct(boxed)),
        )
    });

    check("AC9 knapsack vs mlp and lp_max", &mut || {
        let ds = dataset(DatasetSpec::Knapsack(KnapsackSpec::new(5)));
        let labels_optimal = ds.train.iter().chain(&ds.test).all(|it| {
            let w = it.weights.as_deref().unwrap_or_default();
            let p = it.prices.as_deref().unwrap_or_default();
            let value: f64 = p.iter().zip(&it.label).map(|(p, &y)| p * y as f64).sum();
            let load: f64 = w.iter().zip(&it.label).map(|(w, &y)| w * y as f64).sum();
            load <= 100.0 + 1e-9 && (value - knapsack_dp(w, p, 100.0)).abs() < 1e-9
        });
        let seeds = [0, 1, 2, 3, 4];
        let budget = |model| ExperimentConfig { epochs: KNAPSACK_EPOCHS, ..config(model, &seeds) };
        let acc = accuracy(&budget(ModelKind::Comboptnet), &ds);
        let mlp = accuracy(&budget(ModelKind::Mlp), &ds);
        let lp = accuracy(&config(ModelKind::LpMax, &[0]), &ds);
        outcome(
            labels_optimal && acc >= mlp + 0.05 && acc >= lp + 0.05,
            format!(
                "{KNAPSACK_EPOCHS} epochs, 5 seeds: comboptnet {} mlp {} lp_max {} (need +5 points), labels DP-optimal: {labels_optimal}",
                pct(acc),
                pct(mlp),
                pct(lp)
            ),
        )
    });

    check("AC10 ablation directions on rc binary m=4", &mut || {
        let canonical = accuracy(&ExperimentConfig { basis: BasisMode::Canonical, ..comb.clone() }, &rc_b4);
        let hard = accuracy(&ExperimentConfig { temperature: Temperature::Hard, ..comb.clone() }, &rc_b4);
        outcome(
            comb_b4 >= canonical + 0.20 && comb_b4 >= hard,
            format!(
                "delta {} vs canonical {} (need +20 points); soft {} vs hard {}",
                pct(comb_b4),
                pct(canonical),
                pct(comb_b4),
                pct(hard)
            ),
        )
    });

    check("AC11 softmin bounds", &mut softmin_properties);

    check("AC12 byte-identical reruns", &mut || {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut bytes = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("run{k}"));
            let runs = run(&comb, &rc_b1).expect("training run");
            emit_results(&comb, Some(&rc_b1.spec), &runs, &out).expect("emit");
            bytes.push(std::fs::read(out.join("results.csv")).expect("csv"));
        }
        outcome(bytes[0] == bytes[1], format!("two 3-seed runs, {} CSV bytes each", bytes[0].len()))
    });

    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    let total: f64 = results.iter().map(|r| r.2).sum();
    println!("{} of {} criteria passed in {total:.0}s", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
