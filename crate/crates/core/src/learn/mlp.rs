//! Dense feed-forward networks with rectifier hidden layers.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Linear,
    Tanh,
}

/// A fully connected network. Parameters live in one flat vector, layer by
/// layer: the `out x in` weight matrix (row-major) followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    output: OutputActivation,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass, needed for backprop.
#[derive(Debug, Clone)]
pub struct Cache {
    /// `inputs[l]` is the input to layer `l`; the last entry is the output.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of every layer.
    pre: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.inputs.last().expect("cache holds the output")
    }

    /// Which rectifier units were active, hidden layers only.
    pub fn activation_pattern(&self) -> Vec<bool> {
        let hidden = &self.pre[..self.pre.len() - 1];
        hidden.iter().flatten().map(|&z| z > 0.0).collect()
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            output,
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Weights and biases drawn uniformly from `+-1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], output: OutputActivation, rng: &mut impl Rng) -> Result<Self> {
        let mut net = Self::zeros(sizes, output)?;
        let mut k = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..w[0] * w[1] + w[1] {
                net.params[k] = rng.gen_range(-bound..=bound);
                k += 1;
            }
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], output: OutputActivation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes, output)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("non-finite network parameter".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offsets of the weight block and the bias block of layer `l`.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let w_start = param_count(&self.sizes[..=l]);
        (w_start, w_start + self.sizes[l] * self.sizes[l + 1])
    }

    pub fn forward(&self, x: &[f64]) -> Result<Cache> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let n = self.n_layers();
        let mut inputs = Vec::with_capacity(n + 1);
        let mut pre = Vec::with_capacity(n);
        inputs.push(x.to_vec());
        for l in 0..n {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (wo, bo) = self.offsets(l);
            let a = &inputs[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &self.params[wo + o * n_in..wo + (o + 1) * n_in];
                    self.params[bo + o] + row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>()
                })
                .collect();
            let act = if l + 1 < n {
                z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
            } else {
                match self.output {
                    OutputActivation::Linear => z.clone(),
                    OutputActivation::Tanh => z.iter().map(|v| v.tanh()).collect(),
                }
            };
            pre.push(z);
            inputs.push(act);
        }
        Ok(Cache { inputs, pre })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.inputs.pop().expect("output"))
    }

    /// Reverse-mode pass. Adds the parameter gradient of `dy . y` to
    /// `grad` and returns the gradient with respect to the input. The
    /// rectifier's derivative at exactly zero is taken as zero.
    pub fn backward(&self, cache: &Cache, dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        assert_eq!(dy.len(), self.output_dim(), "output gradient size");
        assert_eq!(grad.len(), self.params.len(), "gradient buffer size");
        let n = self.n_layers();
        let mut delta: Vec<f64> = match self.output {
            OutputActivation::Linear => dy.to_vec(),
            OutputActivation::Tanh => dy
                .iter()
                .zip(&cache.inputs[n])
                .map(|(g, y)| g * (1.0 - y * y))
                .collect(),
        };
        for l in (0..n).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (wo, bo) = self.offsets(l);
            let a = &cache.inputs[l];
            let mut dx = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad[bo + o] += d;
                let row = wo + o * n_in;
                for i in 0..n_in {
                    grad[row + i] += d * a[i];
                    dx[i] += self.params[row + i] * d;
                }
            }
            if l > 0 {
                for (g, z) in dx.iter_mut().zip(&cache.pre[l - 1]) {
                    if *z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = dx;
        }
        delta
    }

    /// `self <- tau * self + (1 - tau) * online`, written as an increment so
    /// that equal networks stay bit-identical.
    pub fn polyak_toward(&mut self, online: &Mlp, tau: f64) {
        assert_eq!(self.sizes, online.sizes, "architectures differ");
        for (t, o) in self.params.iter_mut().zip(&online.params) {
            *t += (1.0 - tau) * (o - *t);
        }
    }
}
