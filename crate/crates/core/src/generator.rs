//! The quantum KAN generator: latent encoding, layered ansatz with an
//! entangling CZ chain, inter-layer readout and re-encoding, per-patch
//! Born-machine readout with optional ancilla post-selection, and patch
//! assembly into an image. A plain layered Ry ansatz with directly trainable
//! angles is included as the baseline.
//!
//! A patch pipeline is: forward probabilities -> (ancilla = 0 slice,
//! renormalized) -> first `patch_len` entries -> divide by the maximum entry.
//! With the little-endian basis ordering the ancilla (highest-index qubit)
//! is the most significant index bit, so its zero branch is the first half
//! of the probability vector.

use crate::activations::{BasisConfig, KanActivationParams};
use crate::statevector::{ProbVector, StateError, StateVector, MAX_QUBITS};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("latent vector has {got} components, expected {expected}")]
    LatentLengthMismatch { expected: usize, got: usize },
    #[error("theta has {got} entries, expected {expected}")]
    ThetaLengthMismatch { expected: usize, got: usize },
    #[error("patch index {index} out of range for {n_patches} patches")]
    PatchOutOfRange { index: usize, n_patches: usize },
    #[error("parameter-shift gradients need a single-layer ansatz, got {n_layers} layers")]
    ParameterShiftUnsupported { n_layers: usize },
    #[error("snapshot i/o failed: {0}")]
    SnapshotIo(String),
}

/// Which generator family a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// KAN ansatz: angles are learnable functions of the layer input.
    Vqkan,
    /// Baseline ansatz: angles are the trainable parameters themselves.
    Qgan,
}

/// Circuit and patch geometry shared by both generator families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_qubits: usize,
    /// 0 or 1; the ancilla is the highest-index qubit.
    pub n_ancilla: usize,
    /// Ry/CZ blocks per layer.
    pub depth: usize,
    /// KAN layers, with exact readout and re-encoding between them.
    pub n_layers: usize,
    pub n_patches: usize,
    /// Pixels per patch, taken from the front of the readout distribution.
    pub patch_len: usize,
    pub basis: BasisConfig,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.n_qubits < 1 || self.n_qubits > MAX_QUBITS {
            return Err(GeneratorError::InvalidConfig(format!(
                "n_qubits {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.n_ancilla > 1 {
            return Err(GeneratorError::InvalidConfig(
                "at most one ancilla qubit is supported".into(),
            ));
        }
        if self.n_ancilla >= self.n_qubits {
            return Err(GeneratorError::InvalidConfig(
                "ancilla count must leave at least one data qubit".into(),
            ));
        }
        if self.n_layers < 1 {
            return Err(GeneratorError::InvalidConfig(
                "n_layers must be at least 1".into(),
            ));
        }
        if self.n_patches < 1 || self.patch_len < 1 {
            return Err(GeneratorError::InvalidConfig(
                "n_patches and patch_len must be at least 1".into(),
            ));
        }
        if self.patch_len > (1usize << self.data_qubits()) {
            return Err(GeneratorError::InvalidConfig(format!(
                "patch_len {} exceeds 2^{} readout entries",
                self.patch_len,
                self.data_qubits()
            )));
        }
        Ok(())
    }

    pub fn data_qubits(&self) -> usize {
        self.n_qubits - self.n_ancilla
    }

    pub fn image_len(&self) -> usize {
        self.n_patches * self.patch_len
    }

    /// Trainable KAN coefficients per patch.
    pub fn coefficients_per_patch(&self) -> usize {
        self.n_layers * self.n_qubits * self.depth * self.basis.n_basis
    }

    /// Trainable baseline angles per patch.
    pub fn thetas_per_patch(&self) -> usize {
        self.n_qubits * self.depth
    }
}

/// Latent noise: one rotation angle per qubit, sampled Uniform[0, pi/2).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector(Vec<f64>);

impl LatentVector {
    pub fn new(z: Vec<f64>) -> Self {
        Self(z)
    }

    pub fn sample<R: rand::Rng>(rng: &mut R, n_qubits: usize) -> Self {
        Self((0..n_qubits).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Map into the basis domain [0, 1] by dividing by pi/2.
    pub fn unit_inputs(&self) -> Vec<f64> {
        self.0.iter().map(|z| z / FRAC_PI_2).collect()
    }
}

/// Ry(z_j) on qubit j of the all-zeros state.
pub fn initial_state(z: &LatentVector) -> Result<StateVector, GeneratorError> {
    let mut state = StateVector::zero(z.len())?;
    for (j, &angle) in z.components().iter().enumerate() {
        state.apply_ry(j, angle)?;
    }
    Ok(state)
}

/// Angles of one KAN layer, flattened depth-major: slot `d * n_qubits + j`.
pub fn kan_layer_angles(params: &KanActivationParams, layer: usize, x_in: &[f64]) -> Vec<f64> {
    let (_, n_qubits, depth, _) = params.shape();
    let mut angles = Vec::with_capacity(depth * n_qubits);
    for d in 0..depth {
        for j in 0..n_qubits {
            angles.push(params.phi(layer, j, d, x_in));
        }
    }
    angles
}

/// Apply a flattened angle grid: per depth block, Ry on every qubit then the
/// CZ chain on neighbor pairs (0,1), (1,2), ...
pub fn apply_angle_grid(state: &mut StateVector, angles: &[f64]) -> Result<(), GeneratorError> {
    let n_qubits = state.n_qubits();
    assert!(
        angles.len() % n_qubits == 0,
        "angle grid must hold whole depth blocks"
    );
    for block in angles.chunks_exact(n_qubits) {
        for (j, &angle) in block.iter().enumerate() {
            state.apply_ry(j, angle)?;
        }
        for j in 0..n_qubits.saturating_sub(1) {
            state.apply_cz(j, j + 1)?;
        }
    }
    Ok(())
}

/// Initial state from `z`, then the angle grid, then exact readout.
pub fn probs_from_angles(z: &LatentVector, angles: &[f64]) -> Result<ProbVector, GeneratorError> {
    let mut state = initial_state(z)?;
    apply_angle_grid(&mut state, angles)?;
    Ok(state.probabilities())
}

/// One KAN layer: for d = 0..depth, Ry(phi_{j,d}(x_in)) on every qubit j,
/// then CZ on each neighbor pair.
pub fn apply_kan_layer(
    state: &mut StateVector,
    params: &KanActivationParams,
    layer: usize,
    x_in: &[f64],
) -> Result<(), GeneratorError> {
    let angles = kan_layer_angles(params, layer, x_in);
    apply_angle_grid(state, &angles)
}

/// Full KAN forward pass: layer 1 takes the latent mapped into [0, 1]; after
/// every layer but the last, the readout distribution is split into n_qubits
/// equal contiguous segments whose means become the next layer's input.
pub fn forward_probs(
    params: &KanActivationParams,
    config: &GeneratorConfig,
    z: &LatentVector,
) -> Result<ProbVector, GeneratorError> {
    if z.len() != config.n_qubits {
        return Err(GeneratorError::LatentLengthMismatch {
            expected: config.n_qubits,
            got: z.len(),
        });
    }
    let mut state = initial_state(z)?;
    let mut x_in = z.unit_inputs();
    for layer in 0..config.n_layers {
        apply_kan_layer(&mut state, params, layer, &x_in)?;
        if layer + 1 < config.n_layers {
            x_in = state.probabilities().segment_means(config.n_qubits);
        }
    }
    Ok(state.probabilities())
}

/// Baseline forward pass: Ry(z) encoding, then `depth` blocks of trainable
/// Ry angles (depth-major layout, slot `d * n_qubits + j`) and the CZ chain.
pub fn qgan_forward(
    theta: &[f64],
    depth: usize,
    z: &LatentVector,
) -> Result<ProbVector, GeneratorError> {
    let expected = z.len() * depth;
    if theta.len() != expected {
        return Err(GeneratorError::ThetaLengthMismatch {
            expected,
            got: theta.len(),
        });
    }
    probs_from_angles(z, theta)
}

/// One patch after post-selection, truncation, and max-scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchOutput {
    pub pixels: Vec<f64>,
    /// Set when the ancilla = 0 branch carried no probability mass and the
    /// patch fell back to all zeros.
    pub zero_fallback: bool,
}

/// A full image assembled from patches (contiguous blocks of the flattened
/// image, in patch order).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub pixels: Vec<f64>,
    pub zero_fallback: bool,
}

fn max_with_index(xs: &[f64]) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// Readout distribution -> pixels: condition on ancilla = 0 (first half of
/// the vector) when an ancilla is configured, truncate to the first
/// `patch_len` entries, and scale by the maximum entry. A zero-mass ancilla
/// branch yields all zeros and sets the fallback flag; a zero maximum yields
/// all zeros.
pub fn postprocess_patch(probs: &ProbVector, config: &GeneratorConfig) -> PatchOutput {
    let raw = probs.as_slice();
    let (kept, norm): (&[f64], f64) = if config.n_ancilla == 1 {
        let half = &raw[..raw.len() / 2];
        let mass: f64 = half.iter().sum();
        if mass <= 0.0 {
            return PatchOutput {
                pixels: vec![0.0; config.patch_len],
                zero_fallback: true,
            };
        }
        (half, mass)
    } else {
        (raw, 1.0)
    };
    let truncated: Vec<f64> = kept[..config.patch_len].iter().map(|p| p / norm).collect();
    let (_, max) = max_with_index(&truncated);
    if max <= 0.0 {
        return PatchOutput {
            pixels: vec![0.0; config.patch_len],
            zero_fallback: false,
        };
    }
    PatchOutput {
        pixels: truncated.iter().map(|p| p / max).collect(),
        zero_fallback: false,
    }
}

/// Directional derivative of the patch pixels given the raw readout
/// distribution and its directional derivative with respect to one circuit
/// angle. Mirrors [`postprocess_patch`] exactly, treating the argmax of the
/// truncated slice as locally constant; degenerate branches return zeros.
pub fn postprocess_directional(
    probs: &ProbVector,
    d_probs: &[f64],
    config: &GeneratorConfig,
) -> Vec<f64> {
    let raw = probs.as_slice();
    let (kept, d_kept): (Vec<f64>, Vec<f64>) = if config.n_ancilla == 1 {
        let half = &raw[..raw.len() / 2];
        let d_half = &d_probs[..raw.len() / 2];
        let mass: f64 = half.iter().sum();
        if mass <= 0.0 {
            return vec![0.0; config.patch_len];
        }
        let d_mass: f64 = d_half.iter().sum();
        let q: Vec<f64> = half.iter().map(|p| p / mass).collect();
        let dq: Vec<f64> = half
            .iter()
            .zip(d_half)
            .map(|(p, dp)| dp / mass - p * d_mass / (mass * mass))
            .collect();
        (q, dq)
    } else {
        (raw.to_vec(), d_probs.to_vec())
    };
    let t = &kept[..config.patch_len];
    let dt = &d_kept[..config.patch_len];
    let (arg_max, max) = max_with_index(t);
    if max <= 0.0 {
        return vec![0.0; config.patch_len];
    }
    let d_max = dt[arg_max];
    t.iter()
        .zip(dt)
        .map(|(ti, dti)| dti / max - ti * d_max / (max * max))
        .collect()
}

/// KAN generator: shared geometry plus one independent trainable coefficient
/// set per patch, all patches driven by the same latent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VqkanGenerator {
    config: GeneratorConfig,
    patch_params: Vec<KanActivationParams>,
}

impl VqkanGenerator {
    /// All coefficients start at zero.
    pub fn new(config: GeneratorConfig) -> Result<Self, GeneratorError> {
        config.validate()?;
        let patch_params = (0..config.n_patches)
            .map(|_| {
                KanActivationParams::zeros(
                    config.basis.clone(),
                    config.n_layers,
                    config.n_qubits,
                    config.depth,
                )
            })
            .collect();
        Ok(Self {
            config,
            patch_params,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn patch_params(&self) -> &[KanActivationParams] {
        &self.patch_params
    }

    pub fn patch_params_mut(&mut self) -> &mut [KanActivationParams] {
        &mut self.patch_params
    }

    pub fn coefficient_count(&self) -> usize {
        self.config.n_patches * self.config.coefficients_per_patch()
    }
}

/// Baseline generator: one trainable angle vector per patch.
#[derive(Debug, Clone, PartialEq)]
pub struct QganGenerator {
    config: GeneratorConfig,
    patch_thetas: Vec<Vec<f64>>,
}

impl QganGenerator {
    pub fn new(config: GeneratorConfig) -> Result<Self, GeneratorError> {
        config.validate()?;
        let patch_thetas = vec![vec![0.0; config.thetas_per_patch()]; config.n_patches];
        Ok(Self {
            config,
            patch_thetas,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn patch_thetas(&self) -> &[Vec<f64>] {
        &self.patch_thetas
    }

    pub fn coefficient_count(&self) -> usize {
        self.config.n_patches * self.config.thetas_per_patch()
    }
}

/// Either generator family behind one training-facing surface: flat
/// per-patch coefficient vectors, patch/image generation, and the angle-grid
/// hooks the gradient routines build on.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorModel {
    Vqkan(VqkanGenerator),
    Qgan(QganGenerator),
}

impl GeneratorModel {
    pub fn new(kind: GeneratorKind, config: GeneratorConfig) -> Result<Self, GeneratorError> {
        Ok(match kind {
            GeneratorKind::Vqkan => GeneratorModel::Vqkan(VqkanGenerator::new(config)?),
            GeneratorKind::Qgan => GeneratorModel::Qgan(QganGenerator::new(config)?),
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            GeneratorModel::Vqkan(_) => GeneratorKind::Vqkan,
            GeneratorModel::Qgan(_) => GeneratorKind::Qgan,
        }
    }

    pub fn config(&self) -> &GeneratorConfig {
        match self {
            GeneratorModel::Vqkan(g) => g.config(),
            GeneratorModel::Qgan(g) => g.config(),
        }
    }

    pub fn n_patches(&self) -> usize {
        self.config().n_patches
    }

    /// Trainable values per patch (KAN coefficients or baseline angles).
    pub fn patch_coeff_len(&self) -> usize {
        match self {
            GeneratorModel::Vqkan(g) => g.config.coefficients_per_patch(),
            GeneratorModel::Qgan(g) => g.config.thetas_per_patch(),
        }
    }

    pub fn total_coefficients(&self) -> usize {
        self.n_patches() * self.patch_coeff_len()
    }

    fn check_patch(&self, patch: usize) -> Result<(), GeneratorError> {
        if patch >= self.n_patches() {
            return Err(GeneratorError::PatchOutOfRange {
                index: patch,
                n_patches: self.n_patches(),
            });
        }
        Ok(())
    }

    pub fn patch_coefficients(&self, patch: usize) -> &[f64] {
        match self {
            GeneratorModel::Vqkan(g) => g.patch_params[patch].coefficients(),
            GeneratorModel::Qgan(g) => &g.patch_thetas[patch],
        }
    }

    pub fn patch_coefficients_mut(&mut self, patch: usize) -> &mut [f64] {
        match self {
            GeneratorModel::Vqkan(g) => g.patch_params[patch].coefficients_mut(),
            GeneratorModel::Qgan(g) => &mut g.patch_thetas[patch],
        }
    }

    /// Raw readout distribution for one patch.
    pub fn patch_probs(&self, patch: usize, z: &LatentVector) -> Result<ProbVector, GeneratorError> {
        self.check_patch(patch)?;
        match self {
            GeneratorModel::Vqkan(g) => forward_probs(&g.patch_params[patch], &g.config, z),
            GeneratorModel::Qgan(g) => {
                if z.len() != g.config.n_qubits {
                    return Err(GeneratorError::LatentLengthMismatch {
                        expected: g.config.n_qubits,
                        got: z.len(),
                    });
                }
                qgan_forward(&g.patch_thetas[patch], g.config.depth, z)
            }
        }
    }

    /// Post-processed pixels for one patch.
    pub fn generate_patch(&self, patch: usize, z: &LatentVector) -> Result<PatchOutput, GeneratorError> {
        let probs = self.patch_probs(patch, z)?;
        Ok(postprocess_patch(&probs, self.config()))
    }

    /// Concatenate all patches, every one driven by the same latent vector.
    pub fn generate_image(&self, z: &LatentVector) -> Result<ImageSample, GeneratorError> {
        let mut pixels = Vec::with_capacity(self.config().image_len());
        let mut zero_fallback = false;
        for patch in 0..self.n_patches() {
            let out = self.generate_patch(patch, z)?;
            zero_fallback |= out.zero_fallback;
            pixels.extend(out.pixels);
        }
        Ok(ImageSample {
            pixels,
            zero_fallback,
        })
    }

    /// True when the circuit angles are an explicit function of the
    /// coefficients and the latent alone (single-layer KAN or the baseline),
    /// which is what the shift-rule gradient route requires.
    pub fn supports_angle_grid(&self) -> bool {
        match self {
            GeneratorModel::Vqkan(g) => g.config.n_layers == 1,
            GeneratorModel::Qgan(_) => true,
        }
    }

    /// The flattened angle grid for one patch (slot `d * n_qubits + j`).
    pub fn angle_grid(&self, patch: usize, z: &LatentVector) -> Result<Vec<f64>, GeneratorError> {
        self.check_patch(patch)?;
        match self {
            GeneratorModel::Vqkan(g) => {
                if g.config.n_layers != 1 {
                    return Err(GeneratorError::ParameterShiftUnsupported {
                        n_layers: g.config.n_layers,
                    });
                }
                Ok(kan_layer_angles(
                    &g.patch_params[patch],
                    0,
                    &z.unit_inputs(),
                ))
            }
            GeneratorModel::Qgan(g) => Ok(g.patch_thetas[patch].clone()),
        }
    }

    /// Grid slot affected by one flat coefficient index.
    pub fn slot_of_coeff(&self, coeff: usize) -> usize {
        match self {
            GeneratorModel::Vqkan(g) => {
                let n_basis = g.config.basis.n_basis;
                let depth = g.config.depth;
                let rest = coeff / n_basis;
                let d = rest % depth;
                let j = (rest / depth) % g.config.n_qubits;
                d * g.config.n_qubits + j
            }
            GeneratorModel::Qgan(_) => coeff,
        }
    }

    /// Recompute the angle for one grid slot from the current coefficients.
    pub fn slot_angle(&self, patch: usize, slot: usize, z: &LatentVector) -> f64 {
        match self {
            GeneratorModel::Vqkan(g) => {
                let n_qubits = g.config.n_qubits;
                let (d, j) = (slot / n_qubits, slot % n_qubits);
                g.patch_params[patch].phi(0, j, d, &z.unit_inputs())
            }
            GeneratorModel::Qgan(g) => g.patch_thetas[patch][slot],
        }
    }

    /// Scatter an angle-level gradient into the patch coefficient gradient:
    /// KAN chains through d(phi)/d(c), the baseline maps one to one.
    pub fn accumulate_coeff_grad(
        &self,
        patch: usize,
        slot: usize,
        dl_dphi: f64,
        z: &LatentVector,
        grads: &mut [f64],
    ) {
        match self {
            GeneratorModel::Vqkan(g) => {
                let n_qubits = g.config.n_qubits;
                let (d, j) = (slot / n_qubits, slot % n_qubits);
                let params = &g.patch_params[patch];
                let phi_grad = params.phi_gradient(0, j, d, &z.unit_inputs());
                let offset = params.slot_offset(0, j, d);
                for (s, pg) in phi_grad.iter().enumerate() {
                    grads[offset + s] += dl_dphi * pg;
                }
            }
            GeneratorModel::Qgan(_) => grads[slot] += dl_dphi,
        }
    }

    pub fn snapshot(&self) -> GeneratorSnapshot {
        GeneratorSnapshot {
            kind: self.kind(),
            config: self.config().clone(),
            patch_coefficients: (0..self.n_patches())
                .map(|p| self.patch_coefficients(p).to_vec())
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: &GeneratorSnapshot) -> Result<Self, GeneratorError> {
        let mut model = GeneratorModel::new(snapshot.kind, snapshot.config.clone())?;
        if snapshot.patch_coefficients.len() != model.n_patches() {
            return Err(GeneratorError::InvalidConfig(format!(
                "snapshot holds {} patches, config expects {}",
                snapshot.patch_coefficients.len(),
                model.n_patches()
            )));
        }
        for (p, coeffs) in snapshot.patch_coefficients.iter().enumerate() {
            let dst = model.patch_coefficients_mut(p);
            if coeffs.len() != dst.len() {
                return Err(GeneratorError::InvalidConfig(format!(
                    "snapshot patch {p} holds {} coefficients, expected {}",
                    coeffs.len(),
                    dst.len()
                )));
            }
            dst.copy_from_slice(coeffs);
        }
        Ok(model)
    }
}

/// Flat, ordered parameter snapshot: config header plus one coefficient
/// array per patch. JSON output is byte-stable for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSnapshot {
    pub kind: GeneratorKind,
    pub config: GeneratorConfig,
    pub patch_coefficients: Vec<Vec<f64>>,
}

impl GeneratorSnapshot {
    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), GeneratorError> {
        serde_json::to_writer_pretty(writer, self)
            .map_err(|e| GeneratorError::SnapshotIo(e.to_string()))
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self, GeneratorError> {
        serde_json::from_reader(reader).map_err(|e| GeneratorError::SnapshotIo(e.to_string()))
    }
}
