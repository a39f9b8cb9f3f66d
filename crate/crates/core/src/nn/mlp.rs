use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sigmoid outputs rescaled per coordinate to `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputScale {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Dense ReLU network. The output layer is linear, or a scaled sigmoid when
/// `output` is set.
///
/// All parameters sit in one flat vector. Layer `l` stores its weights
/// input-major (`w[i * out + o]`) followed by its biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dims: Vec<usize>,
    pub params: Vec<f64>,
    pub output: Option<OutputScale>,
}

/// Activations saved by [`Mlp::forward`].
#[derive(Clone, Debug)]
pub struct MlpCache {
    /// Input followed by each layer's post-activation output.
    acts: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache holds the input")
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Mlp {
    /// Uniform `±1/sqrt(fan_in)` initialization for weights and biases.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], output: Option<OutputScale>, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output sizes");
        let mut params = Vec::new();
        for w in dims.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1] + w[1]).map(|_| rng.random_range(-bound..bound)));
        }
        Self {
            dims: dims.to_vec(),
            params,
            output,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("non-empty dims")
    }

    pub fn num_params(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "MLP with dims {:?} has {} parameters",
                self.dims,
                self.params.len()
            )));
        }
        if let Some(s) = &self.output {
            if s.lo.len() != self.output_dim() || s.hi.len() != self.output_dim() {
                return Err(Error::Shape("output scale length mismatch".into()));
            }
        }
        if !self.params.iter().all(|p| p.is_finite()) {
            return Err(Error::Diverged("MLP has non-finite parameters".into()));
        }
        Ok(())
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.dims[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<MlpCache> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "MLP expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let last = self.num_layers() - 1;
        let mut acts = Vec::with_capacity(self.dims.len());
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..self.num_layers() {
            let (din, dout) = (self.dims[l], self.dims[l + 1]);
            let w = &self.params[off..off + din * dout];
            let b = &self.params[off + din * dout..off + din * dout + dout];
            off += din * dout + dout;
            let mut z = b.to_vec();
            for (i, &h) in acts[l].iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                for (zo, wo) in z.iter_mut().zip(&w[i * dout..(i + 1) * dout]) {
                    *zo += h * wo;
                }
            }
            if l < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            } else if let Some(s) = &self.output {
                for (o, v) in z.iter_mut().enumerate() {
                    *v = s.lo[o] + (s.hi[o] - s.lo[o]) * sigmoid(*v);
                }
            }
            acts.push(z);
        }
        Ok(MlpCache { acts })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.acts.pop().expect("output layer"))
    }

    /// Adds `∂(dout·output)/∂params` into `grad` and returns the gradient
    /// with respect to the input.
    pub fn backward(&self, cache: &MlpCache, dout: &[f64], grad: &mut [f64]) -> Vec<f64> {
        assert_eq!(grad.len(), self.params.len(), "gradient buffer length");
        assert_eq!(dout.len(), self.output_dim(), "output gradient length");
        let last = self.num_layers() - 1;
        let mut delta = dout.to_vec();
        if let Some(s) = &self.output {
            let out = &cache.acts[last + 1];
            for (o, d) in delta.iter_mut().enumerate() {
                let span = s.hi[o] - s.lo[o];
                let sg = (out[o] - s.lo[o]) / span;
                *d *= span * sg * (1.0 - sg);
            }
        }
        for l in (0..self.num_layers()).rev() {
            let (din, dout_l) = (self.dims[l], self.dims[l + 1]);
            let off = self.layer_offset(l);
            let input = &cache.acts[l];
            {
                let (gw, gb) = grad[off..off + din * dout_l + dout_l].split_at_mut(din * dout_l);
                for (g, d) in gb.iter_mut().zip(&delta) {
                    *g += d;
                }
                for (i, &h) in input.iter().enumerate() {
                    if h == 0.0 {
                        continue;
                    }
                    for (g, d) in gw[i * dout_l..(i + 1) * dout_l].iter_mut().zip(&delta) {
                        *g += h * d;
                    }
                }
            }
            let w = &self.params[off..off + din * dout_l];
            let mut prev: Vec<f64> = (0..din)
                .map(|i| {
                    w[i * dout_l..(i + 1) * dout_l]
                        .iter()
                        .zip(&delta)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect();
            if l > 0 {
                for (p, &h) in prev.iter_mut().zip(input) {
                    if h <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        delta
    }
}
