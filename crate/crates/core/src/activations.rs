//! Learnable univariate angle functions for the quantum KAN ansatz.
//!
//! Each rotation angle is phi = sum_i 2*acos(clamp(E_f(x_i) + sum_s c_s * B_s(x_i)))
//! over the components x_i of the layer input, where E_f is a Fermi-Dirac-like
//! activation and B_s is a trainable basis expansion on [0, 1] (cubic B-splines
//! on an open uniform knot vector, or Gaussian radial basis functions). The
//! acos argument is clamped to [-1, 1]; on the clamp plateau the coefficient
//! gradient is defined to be zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inner acos arguments this close to +-1 are treated as clamped: the
/// gradient contribution is zero there (plateau / derivative singularity).
pub const CLAMP_GUARD: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ActivationError {
    #[error("basis index {index} out of range for {n_basis} basis functions")]
    BasisIndexOutOfRange { index: usize, n_basis: usize },
    #[error("invalid basis configuration: {0}")]
    InvalidConfig(String),
}

/// Which family of basis functions backs the trainable expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    /// Cubic B-splines on an open uniform knot vector over [0, 1].
    BSpline,
    /// Gaussian bumps with centers uniform on [0, 1], width = center spacing.
    Rbf,
}

/// Basis family plus sizing. Inputs are clamped to the domain [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub family: BasisFamily,
    /// Number of trainable basis functions per angle.
    pub n_basis: usize,
    /// Knot-interval count of the grid schedule, 4*(trial+2) by default.
    /// Recorded for run provenance; the spline knot vector itself is sized
    /// from `n_basis` so that the basis is complete over [0, 1].
    pub n_grid_intervals: usize,
}

impl BasisConfig {
    pub fn new(
        family: BasisFamily,
        n_basis: usize,
        n_grid_intervals: usize,
    ) -> Result<Self, ActivationError> {
        if n_basis < 1 {
            return Err(ActivationError::InvalidConfig(
                "n_basis must be at least 1".into(),
            ));
        }
        if n_grid_intervals < 1 {
            return Err(ActivationError::InvalidConfig(
                "n_grid_intervals must be at least 1".into(),
            ));
        }
        Ok(Self {
            family,
            n_basis,
            n_grid_intervals,
        })
    }

    /// Grid schedule: the interval count is 4*(trial + 2), so trial 0 gives 8.
    pub fn with_trial(family: BasisFamily, n_basis: usize, trial: usize) -> Self {
        Self::new(family, n_basis, 4 * (trial + 2)).expect("n_basis >= 1")
    }

    /// Spline degree: cubic, lowered when there are too few basis functions
    /// to support it.
    fn degree(&self) -> usize {
        self.n_basis.saturating_sub(1).min(3)
    }

    /// Open uniform knot vector with exactly `n_basis` basis functions:
    /// degree+1 clamped knots at each end, uniform interior knots.
    fn knots(&self) -> Vec<f64> {
        let p = self.degree();
        let n = self.n_basis;
        let intervals = n - p;
        let mut knots = Vec::with_capacity(n + p + 1);
        for _ in 0..=p {
            knots.push(0.0);
        }
        for i in 1..intervals {
            knots.push(i as f64 / intervals as f64);
        }
        for _ in 0..=p {
            knots.push(1.0);
        }
        knots
    }

    /// Evaluate basis function `s` at `x`; `x` is clamped to [0, 1].
    pub fn eval(&self, s: usize, x: f64) -> Result<f64, ActivationError> {
        if s >= self.n_basis {
            return Err(ActivationError::BasisIndexOutOfRange {
                index: s,
                n_basis: self.n_basis,
            });
        }
        Ok(self.eval_unchecked(s, x.clamp(0.0, 1.0)))
    }

    /// All basis values at `x` (clamped to [0, 1]), in index order.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let x = x.clamp(0.0, 1.0);
        (0..self.n_basis)
            .map(|s| self.eval_unchecked(s, x))
            .collect()
    }

    fn eval_unchecked(&self, s: usize, x: f64) -> f64 {
        match self.family {
            BasisFamily::BSpline => {
                if x >= 1.0 {
                    // Right endpoint: only the last clamped spline survives.
                    return if s == self.n_basis - 1 { 1.0 } else { 0.0 };
                }
                cox_de_boor(&self.knots(), s, self.degree(), x)
            }
            BasisFamily::Rbf => {
                let (center, width) = self.rbf_center_width(s);
                let t = (x - center) / width;
                (-t * t).exp()
            }
        }
    }

    fn rbf_center_width(&self, s: usize) -> (f64, f64) {
        if self.n_basis == 1 {
            (0.5, 1.0)
        } else {
            let spacing = 1.0 / (self.n_basis - 1) as f64;
            (s as f64 * spacing, spacing)
        }
    }
}

/// Cox-de Boor recursion with the 0/0 := 0 convention and half-open
/// degree-0 intervals.
fn cox_de_boor(knots: &[f64], i: usize, p: usize, x: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= x && x < knots[i + 1] {
            1.0
        } else {
            0.0
        };
    }
    let mut value = 0.0;
    let left = knots[i + p] - knots[i];
    if left > 0.0 {
        value += (x - knots[i]) / left * cox_de_boor(knots, i, p - 1, x);
    }
    let right = knots[i + p + 1] - knots[i + 1];
    if right > 0.0 {
        value += (knots[i + p + 1] - x) / right * cox_de_boor(knots, i + 1, p - 1, x);
    }
    value
}

/// Fermi-Dirac-like activation x / (exp(-x) + 1). Odd part is x/2:
/// f(x) - f(-x) == x for all x.
pub fn fermi_activation(x: f64) -> f64 {
    x / ((-x).exp() + 1.0)
}

/// Trainable coefficients c[layer][qubit][depth][basis] plus the basis
/// configuration. Coefficients start at zero, so freshly constructed
/// parameters reproduce the pure-activation angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanActivationParams {
    basis: BasisConfig,
    n_layers: usize,
    n_qubits: usize,
    depth: usize,
    coefficients: Vec<f64>,
}

impl KanActivationParams {
    pub fn zeros(basis: BasisConfig, n_layers: usize, n_qubits: usize, depth: usize) -> Self {
        let len = n_layers * n_qubits * depth * basis.n_basis;
        Self {
            basis,
            n_layers,
            n_qubits,
            depth,
            coefficients: vec![0.0; len],
        }
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.basis
    }

    /// (n_layers, n_qubits, depth, n_basis).
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n_layers, self.n_qubits, self.depth, self.basis.n_basis)
    }

    pub fn n_basis(&self) -> usize {
        self.basis.n_basis
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    /// Flat offset of the coefficient block for one (layer, qubit, depth)
    /// angle slot. Layout is layer-major, then qubit, then depth, then basis.
    pub fn slot_offset(&self, layer: usize, qubit: usize, depth: usize) -> usize {
        assert!(layer < self.n_layers && qubit < self.n_qubits && depth < self.depth);
        ((layer * self.n_qubits + qubit) * self.depth + depth) * self.basis.n_basis
    }

    fn slot(&self, layer: usize, qubit: usize, depth: usize) -> &[f64] {
        let off = self.slot_offset(layer, qubit, depth);
        &self.coefficients[off..off + self.basis.n_basis]
    }

    /// The angle phi for one (layer, qubit, depth) slot at input `x_vec`.
    /// Components of `x_vec` are expected in [0, 1]; basis evaluation clamps
    /// regardless, and the acos argument is clamped to [-1, 1].
    pub fn phi(&self, layer: usize, qubit: usize, depth: usize, x_vec: &[f64]) -> f64 {
        let coeffs = self.slot(layer, qubit, depth);
        x_vec
            .iter()
            .map(|&x| {
                let inner = self.acos_argument(coeffs, x);
                2.0 * inner.clamp(-1.0, 1.0).acos()
            })
            .sum()
    }

    /// Partial derivatives of phi with respect to this slot's coefficients.
    /// Components on the clamp plateau contribute zero.
    pub fn phi_gradient(
        &self,
        layer: usize,
        qubit: usize,
        depth: usize,
        x_vec: &[f64],
    ) -> Vec<f64> {
        let coeffs = self.slot(layer, qubit, depth);
        let mut grad = vec![0.0; self.basis.n_basis];
        for &x in x_vec {
            let u = self.acos_argument(coeffs, x).clamp(-1.0, 1.0);
            if u.abs() >= 1.0 - CLAMP_GUARD {
                continue;
            }
            let factor = -2.0 / (1.0 - u * u).sqrt();
            for (g, b) in grad.iter_mut().zip(self.basis.eval_all(x)) {
                *g += factor * b;
            }
        }
        grad
    }

    fn acos_argument(&self, coeffs: &[f64], x: f64) -> f64 {
        let spline: f64 = coeffs
            .iter()
            .zip(self.basis.eval_all(x))
            .map(|(c, b)| c * b)
            .sum();
        fermi_activation(x) + spline
    }
}
