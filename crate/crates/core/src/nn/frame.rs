use serde::{Deserialize, Serialize};

use crate::ilp::norm2;

/// Per-coordinate affine map of an integer box onto `[-0.5, 0.5]^n`:
/// `x = (y - mid) / width`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxFrame {
    pub low: Vec<i64>,
    pub high: Vec<i64>,
    mid: Vec<f64>,
    width: Vec<f64>,
}

impl BoxFrame {
    pub fn new(low: &[i64], high: &[i64]) -> Self {
        let mid = low
            .iter()
            .zip(high)
            .map(|(&l, &h)| (l as f64 + h as f64) / 2.0)
            .collect();
        // A degenerate coordinate maps to 0; any positive width will do.
        let width = low
            .iter()
            .zip(high)
            .map(|(&l, &h)| if h > l { (h - l) as f64 } else { 1.0 })
            .collect();
        Self {
            low: low.to_vec(),
            high: high.to_vec(),
            mid,
            width,
        }
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn width(&self) -> &[f64] {
        &self.width
    }

    pub fn normalize(&self, y: &[i64]) -> Vec<f64> {
        y.iter()
            .zip(self.mid.iter().zip(&self.width))
            .map(|(&v, (m, w))| (v as f64 - m) / w)
            .collect()
    }

    /// Nearest lattice point of the box.
    pub fn denormalize(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                let y = (v * self.width[i] + self.mid[i]).round() as i64;
                y.clamp(self.low[i], self.high[i])
            })
            .collect()
    }

    /// Gradient with respect to `y` from one with respect to `x`.
    pub fn grad_to_integer(&self, dx: &[f64]) -> Vec<f64> {
        dx.iter().zip(&self.width).map(|(g, w)| g / w).collect()
    }

    /// `A x <= b` rewritten over `y`.
    pub fn constraints_to_integer(&self, a: &[Vec<f64>], b: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let a_int: Vec<Vec<f64>> = a
            .iter()
            .map(|row| row.iter().zip(&self.width).map(|(v, w)| v / w).collect())
            .collect();
        let b_int = a_int
            .iter()
            .zip(b)
            .map(|(row, bj)| bj + row.iter().zip(&self.mid).map(|(v, m)| v * m).sum::<f64>())
            .collect();
        (a_int, b_int)
    }

    /// Pulls `(dA, db)` over `y` back to the normalized parameters.
    pub fn constraint_grads_from_integer(
        &self,
        da_int: &[Vec<f64>],
        db_int: &[f64],
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let da = da_int
            .iter()
            .zip(db_int)
            .map(|(row, dbj)| {
                row.iter()
                    .enumerate()
                    .map(|(i, g)| (g + dbj * self.mid[i]) / self.width[i])
                    .collect()
            })
            .collect();
        (da, db_int.to_vec())
    }

    /// Cost over `y` with the same minimizers as `c·x`.
    pub fn cost_to_integer(&self, c: &[f64]) -> Vec<f64> {
        c.iter().zip(&self.width).map(|(v, w)| v / w).collect()
    }

    pub fn cost_grad_from_integer(&self, dc_int: &[f64]) -> Vec<f64> {
        self.cost_to_integer(dc_int)
    }
}

/// `c / ‖c‖₂`; a zero vector is returned unchanged.
pub fn normalize_cost(c: &[f64]) -> Vec<f64> {
    let n = norm2(c);
    if n == 0.0 {
        return c.to_vec();
    }
    c.iter().map(|v| v / n).collect()
}

/// Vector-Jacobian product of [`normalize_cost`].
pub fn normalize_cost_backward(c: &[f64], grad: &[f64]) -> Vec<f64> {
    let n = norm2(c);
    if n == 0.0 {
        return grad.to_vec();
    }
    let proj: f64 = c.iter().zip(grad).map(|(ci, g)| ci * g).sum::<f64>() / n;
    c.iter().zip(grad).map(|(ci, g)| (g - ci / n * proj) / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let binary = BoxFrame::new(&[0, 0], &[1, 1]);
        assert_eq!(binary.normalize(&[0, 1]), vec![-0.5, 0.5]);
        let dense = BoxFrame::new(&[-5], &[5]);
        assert_eq!(dense.normalize(&[0]), vec![0.0]);
        assert_eq!(normalize_cost(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(normalize_cost(&[0.0, 1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn round_trip_on_lattice() {
        let f = BoxFrame::new(&[-5, 0, 2], &[5, 1, 9]);
        for a in -5i64..=5 {
            for c in 2..=9 {
                let y = vec![a, (a & 1).abs(), c];
                assert_eq!(f.denormalize(&f.normalize(&y)), y);
            }
        }
    }

    #[test]
    fn integer_constraints_agree_with_normalized() {
        let f = BoxFrame::new(&[-5, 0], &[5, 1]);
        let a = vec![vec![0.3, -1.1]];
        let b = vec![0.05];
        let (ai, bi) = f.constraints_to_integer(&a, &b);
        for y0 in -5..=5 {
            for y1 in 0..=1 {
                let x = f.normalize(&[y0, y1]);
                let lhs_x = a[0][0] * x[0] + a[0][1] * x[1] - b[0];
                let lhs_y = ai[0][0] * y0 as f64 + ai[0][1] * y1 as f64 - bi[0];
                assert!((lhs_x - lhs_y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constraint_grad_pull_back_matches_differences() {
        let f = BoxFrame::new(&[-5, 0], &[5, 1]);
        let a = vec![vec![0.3, -1.1]];
        let b = vec![0.05];
        let y = [3.0, 1.0];
        // Scalar test function of the integer-frame parameters.
        let phi = |a: &[Vec<f64>], b: &[f64]| {
            let (ai, bi) = f.constraints_to_integer(a, b);
            (ai[0][0] * y[0] + ai[0][1] * y[1] - bi[0]).powi(2)
        };
        let (ai, bi) = f.constraints_to_integer(&a, &b);
        let s = ai[0][0] * y[0] + ai[0][1] * y[1] - bi[0];
        let da_int = vec![vec![2.0 * s * y[0], 2.0 * s * y[1]]];
        let db_int = vec![-2.0 * s];
        let (da, db) = f.constraint_grads_from_integer(&da_int, &db_int);
        let h = 1e-6;
        for i in 0..2 {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[0][i] += h;
            am[0][i] -= h;
            let num = (phi(&ap, &b) - phi(&am, &b)) / (2.0 * h);
            assert!((num - da[0][i]).abs() < 1e-6);
        }
        let num = (phi(&a, &[b[0] + h]) - phi(&a, &[b[0] - h])) / (2.0 * h);
        assert!((num - db[0]).abs() < 1e-6);
    }

    #[test]
    fn normalize_cost_jacobian() {
        let c = [0.4, -1.3, 2.2];
        let g = [0.7, 0.1, -0.4];
        let analytic = normalize_cost_backward(&c, &g);
        let h = 1e-6;
        for i in 0..3 {
            let mut cp = c;
            let mut cm = c;
            cp[i] += h;
            cm[i] -= h;
            let f = |c: &[f64]| normalize_cost(c).iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
            let num = (f(&cp) - f(&cm)) / (2.0 * h);
            assert!((num - analytic[i]).abs() < 1e-8);
        }
    }
}
