use serde::{Deserialize, Serialize};

pub const HUBER_BETA: f64 = 0.3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Mse,
    L1,
    Huber,
    /// Hamming rate, with `sign(e)/n` on mismatching coordinates as gradient.
    L0,
}

fn sign(e: f64) -> f64 {
    if e > 0.0 {
        1.0
    } else if e < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean loss over coordinates and its gradient with respect to `y`.
///
/// # Panics
/// If the inputs differ in length.
pub fn loss_and_gradient(kind: LossKind, y: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(y.len(), target.len(), "loss inputs differ in length");
    let n = y.len() as f64;
    let mut total = 0.0;
    let grad = y
        .iter()
        .zip(target)
        .map(|(a, b)| {
            let e = a - b;
            let (l, g) = match kind {
                LossKind::Mse => (e * e, 2.0 * e),
                LossKind::L1 => (e.abs(), sign(e)),
                LossKind::Huber if e.abs() < HUBER_BETA => (0.5 * e * e / HUBER_BETA, e / HUBER_BETA),
                LossKind::Huber => (e.abs() - 0.5 * HUBER_BETA, sign(e)),
                LossKind::L0 => {
                    if e != 0.0 {
                        (1.0, sign(e))
                    } else {
                        (0.0, 0.0)
                    }
                }
            };
            total += l;
            g / n
        })
        .collect();
    (total / n, grad)
}
