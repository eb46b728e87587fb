//! Exact dense state-vector simulation of the Ry/CZ gate set.
//!
//! Basis ordering is little endian: qubit 0 is the least significant bit of
//! the amplitude index, so the basis state with qubit values `q_0..q_{n-1}`
//! lives at index `q_0 + 2*q_1 + ... + 2^{n-1}*q_{n-1}`. Patch truncation and
//! ancilla post-selection in the generator depend on this ordering. The
//! ancilla, when present, is by convention the highest-index qubit.
//!
//! Probabilities are read out exactly (no shot sampling), which keeps
//! gradients noiseless.

use num_complex::Complex64;
use thiserror::Error;

/// Memory ceiling: 2^24 amplitudes is 256 MiB of complex doubles.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    QubitCountOutOfRange(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    QubitIndexOutOfRange { index: usize, n_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    DuplicateQubit(usize),
    #[error("post-selection branch has zero probability (qubit {qubit}, outcome {outcome})")]
    ZeroProbabilityBranch { qubit: usize, outcome: u8 },
    #[error("amplitude vector length {0} is not a power of two")]
    BadAmplitudeLength(usize),
}

/// Dense complex amplitude vector over the 2^n computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// All-zeros basis state |0...0>.
    pub fn zero(n_qubits: usize) -> Result<Self, StateError> {
        if n_qubits < 1 || n_qubits > MAX_QUBITS {
            return Err(StateError::QubitCountOutOfRange(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Build a state from raw amplitudes. Length must be a power of two;
    /// the caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::BadAmplitudeLength(len));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Sum of |amplitude|^2, 1.0 for any normalized state.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), StateError> {
        if qubit >= self.n_qubits {
            return Err(StateError::QubitIndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Apply Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on one qubit.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<(), StateError> {
        self.check_qubit(qubit)?;
        let (c, s) = {
            let half = 0.5 * theta;
            (half.cos(), half.sin())
        };
        let mask = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = c * a - s * b;
                self.amplitudes[j] = s * a + c * b;
            }
        }
        Ok(())
    }

    /// Apply controlled-Z: negate amplitudes of basis states where both
    /// qubits are 1. Symmetric in its arguments and self-inverse.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<(), StateError> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(StateError::DuplicateQubit(q1));
        }
        let mask = (1usize << q1) | (1usize << q2);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Exact measurement distribution |amplitude|^2 per basis state.
    pub fn probabilities(&self) -> ProbVector {
        ProbVector(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Project onto `qubit == outcome`, renormalize, and drop the measured
    /// qubit. Returns the surviving (n-1)-qubit state and the probability of
    /// the branch. A zero-probability branch is an error the caller must
    /// handle.
    pub fn postselect(&self, qubit: usize, outcome: u8) -> Result<(StateVector, f64), StateError> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let want = if outcome == 0 { 0 } else { mask };
        let low_mask = mask - 1;
        let out_len = self.amplitudes.len() / 2;
        let mut kept = Vec::with_capacity(out_len);
        let mut prob = 0.0;
        for k in 0..out_len {
            let low = k & low_mask;
            let high = (k & !low_mask) << 1;
            let amp = self.amplitudes[high | want | low];
            prob += amp.norm_sqr();
            kept.push(amp);
        }
        if prob <= 0.0 {
            return Err(StateError::ZeroProbabilityBranch { qubit, outcome });
        }
        let scale = 1.0 / prob.sqrt();
        for amp in &mut kept {
            *amp *= scale;
        }
        Ok((
            StateVector {
                n_qubits: self.n_qubits - 1,
                amplitudes: kept,
            },
            prob,
        ))
    }
}

/// Non-negative reals summing to 1: one probability per basis outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validating constructor for externally supplied distributions.
    pub fn new(probs: Vec<f64>) -> Result<Self, StateError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(StateError::BadAmplitudeLength(probs.len()));
        }
        Ok(Self(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mean of each of `n_segments` contiguous equal segments. Used for the
    /// inter-layer re-encoding of the measured distribution. When the length
    /// does not divide evenly the boundaries fall at floor(k*len/n).
    pub fn segment_means(&self, n_segments: usize) -> Vec<f64> {
        assert!(n_segments >= 1, "need at least one segment");
        let len = self.0.len();
        (0..n_segments)
            .map(|k| {
                let start = k * len / n_segments;
                let end = (k + 1) * len / n_segments;
                if end > start {
                    self.0[start..end].iter().sum::<f64>() / (end - start) as f64
                } else {
                    0.0
                }
            })
            .collect()
    }
}
