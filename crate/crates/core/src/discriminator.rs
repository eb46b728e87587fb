//! Classical 3-layer MLP discriminator: [n_data, floor(2*sqrt(n_data)), 1]
//! with ReLU between the marginal layers and a sigmoid output, manual
//! backpropagation, and plain SGD / Adam parameter updates.
//!
//! Parameters live in one flat vector (input weights, hidden biases, output
//! weights, output bias, in that order) so optimizer steps are uniform slices.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiscError {
    #[error("input length {got} does not match discriminator width {expected}")]
    InputLengthMismatch { expected: usize, got: usize },
    #[error("gradient length {got} does not match parameter count {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("discriminator needs at least one input, got {0}")]
    EmptyInput(usize),
}

/// Hidden width floor(2*sqrt(n_data)); exact for the square sizes in use
/// (256 -> 32, 64 -> 16).
pub fn hidden_width(n_data: usize) -> usize {
    (2.0 * (n_data as f64).sqrt()).floor() as usize
}

/// Flat-parameter 3-layer MLP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorMlp {
    n_input: usize,
    n_hidden: usize,
    /// Layout: w1 (hidden x input, row-major), b1 (hidden), w2 (hidden), b2.
    params: Vec<f64>,
}

/// Gradients matching [`DiscriminatorMlp::params`] layout, plus the gradient
/// with respect to the input vector (needed to chain circuit gradients
/// through the discriminator).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscGradients {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

impl DiscriminatorMlp {
    /// Seeded init: weights Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0.
    pub fn init(n_data: usize, seed: u64) -> Self {
        assert!(n_data >= 1, "discriminator needs at least one input");
        let n_hidden = hidden_width(n_data).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; n_data * n_hidden + 2 * n_hidden + 1];
        let bound1 = 1.0 / (n_data as f64).sqrt();
        for w in &mut params[..n_data * n_hidden] {
            *w = rng.random_range(-bound1..bound1);
        }
        let bound2 = 1.0 / (n_hidden as f64).sqrt();
        let w2_start = n_data * n_hidden + n_hidden;
        for w in &mut params[w2_start..w2_start + n_hidden] {
            *w = rng.random_range(-bound2..bound2);
        }
        Self {
            n_input: n_data,
            n_hidden,
            params,
        }
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn layer_dims(&self) -> [usize; 3] {
        [self.n_input, self.n_hidden, 1]
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w1(&self) -> &[f64] {
        &self.params[..self.n_input * self.n_hidden]
    }

    fn b1(&self) -> &[f64] {
        let start = self.n_input * self.n_hidden;
        &self.params[start..start + self.n_hidden]
    }

    fn w2(&self) -> &[f64] {
        let start = self.n_input * self.n_hidden + self.n_hidden;
        &self.params[start..start + self.n_hidden]
    }

    fn b2(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        let w1 = self.w1();
        let b1 = self.b1();
        (0..self.n_hidden)
            .map(|h| {
                let row = &w1[h * self.n_input..(h + 1) * self.n_input];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[h]
            })
            .collect()
    }

    /// sigmoid(w2 . relu(w1 x + b1) + b2), strictly inside (0, 1).
    pub fn forward(&self, x: &[f64]) -> Result<f64, DiscError> {
        if x.len() != self.n_input {
            return Err(DiscError::InputLengthMismatch {
                expected: self.n_input,
                got: x.len(),
            });
        }
        let pre = self.hidden_pre(x);
        let out: f64 = self
            .w2()
            .iter()
            .zip(&pre)
            .map(|(w, &z)| w * z.max(0.0))
            .sum::<f64>()
            + self.b2();
        // |pre| capped so the sigmoid never rounds to exactly 0 or 1 in f64.
        Ok(sigmoid(out.clamp(-36.0, 36.0)))
    }

    /// Exact analytic gradients of `upstream * D(x)` by the chain rule.
    /// The ReLU subgradient at 0 is taken as 0.
    pub fn backward(&self, x: &[f64], upstream: f64) -> Result<DiscGradients, DiscError> {
        if x.len() != self.n_input {
            return Err(DiscError::InputLengthMismatch {
                expected: self.n_input,
                got: x.len(),
            });
        }
        let pre = self.hidden_pre(x);
        let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
        let out: f64 = self.w2().iter().zip(&act).map(|(w, &a)| w * a).sum::<f64>() + self.b2();
        let y = sigmoid(out.clamp(-36.0, 36.0));
        let d_out = upstream * y * (1.0 - y);

        let mut grads = vec![0.0; self.params.len()];
        let w2_start = self.n_input * self.n_hidden + self.n_hidden;
        // Output layer.
        for h in 0..self.n_hidden {
            grads[w2_start + h] = d_out * act[h];
        }
        let last = self.params.len() - 1;
        grads[last] = d_out;
        // Hidden layer, gated by the ReLU.
        let w2 = self.w2();
        let mut d_input = vec![0.0; self.n_input];
        let b1_start = self.n_input * self.n_hidden;
        for h in 0..self.n_hidden {
            if pre[h] <= 0.0 {
                continue;
            }
            let d_hidden = d_out * w2[h];
            grads[b1_start + h] = d_hidden;
            let row = h * self.n_input;
            let w1 = self.w1();
            for i in 0..self.n_input {
                grads[row + i] = d_hidden * x[i];
                d_input[i] += d_hidden * w1[row + i];
            }
        }
        Ok(DiscGradients {
            params: grads,
            input: d_input,
        })
    }

    /// One SGD step over the flat parameters.
    pub fn sgd_update(&mut self, grads: &DiscGradients, lr: f64) -> Result<(), DiscError> {
        sgd_step(&mut self.params, &grads.params, lr)
    }

    /// One Adam step over the flat parameters.
    pub fn adam_update(
        &mut self,
        state: &mut AdamState,
        grads: &DiscGradients,
        lr: f64,
    ) -> Result<(), DiscError> {
        adam_step(state, &mut self.params, &grads.params, lr, ADAM_DEFAULTS)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// p <- p - lr * g, elementwise.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), DiscError> {
    if params.len() != grads.len() {
        return Err(DiscError::ShapeMismatch {
            expected: params.len(),
            got: grads.len(),
        });
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

/// Adam hyperparameters; the conventional (0.9, 0.999, 1e-8).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

pub const ADAM_DEFAULTS: AdamParams = AdamParams {
    beta1: 0.9,
    beta2: 0.999,
    epsilon: 1e-8,
};

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// Standard Adam with bias correction.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    lr: f64,
    hyper: AdamParams,
) -> Result<(), DiscError> {
    if params.len() != grads.len() || state.m.len() != params.len() {
        return Err(DiscError::ShapeMismatch {
            expected: params.len(),
            got: grads.len(),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - hyper.beta1.powi(t);
    let bc2 = 1.0 - hyper.beta2.powi(t);
    for i in 0..params.len() {
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + hyper.epsilon);
    }
    Ok(())
}
