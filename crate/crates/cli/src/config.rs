//! Run configuration: a single JSON file with paper-default values, plus
//! command-line overrides. Unknown keys are rejected with the offending key
//! named (serde's unknown-field error carries it).

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::Path;
use vqkan_gan::activations::{BasisConfig, BasisFamily};
use vqkan_gan::data::{Dataset, DatasetSpec};
use vqkan_gan::generator::{GeneratorConfig, GeneratorKind};
use vqkan_gan::training::{GradientMode, Optimizer, TrainConfig};

fn default_seed() -> u64 {
    42
}
fn default_iterations() -> usize {
    1000
}
fn default_eval_every() -> usize {
    10
}
fn default_eval_set_size() -> usize {
    8
}
fn default_lr_disc() -> f64 {
    0.1
}
fn default_lr_gen() -> f64 {
    0.001
}
fn default_optimizer() -> Optimizer {
    Optimizer::Sgd
}
fn default_gradient_mode() -> GradientMode {
    GradientMode::FiniteDifference
}
fn default_fd_step() -> f64 {
    1e-3
}
fn default_swd_projections() -> usize {
    50
}
fn default_swd_seed() -> u64 {
    12345
}
fn default_kind() -> GeneratorKind {
    GeneratorKind::Vqkan
}
fn default_n_qubits() -> usize {
    8
}
fn default_depth() -> usize {
    6
}
fn default_n_layers() -> usize {
    1
}
fn default_n_patches() -> usize {
    4
}
fn default_family() -> BasisFamily {
    BasisFamily::BSpline
}
fn default_n_basis() -> usize {
    8
}

/// Basis selection as written in config files: the grid interval count
/// comes from the trial counter, N_s = 4*(trial + 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(default = "default_family")]
    pub family: BasisFamily,
    #[serde(default = "default_n_basis")]
    pub n_basis: usize,
    #[serde(default)]
    pub trial: usize,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            family: default_family(),
            n_basis: default_n_basis(),
            trial: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    #[serde(default = "default_kind")]
    pub kind: GeneratorKind,
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    #[serde(default)]
    pub n_ancilla: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_n_layers")]
    pub n_layers: usize,
    #[serde(default = "default_n_patches")]
    pub n_patches: usize,
    /// Pixels per patch; derived from the dataset when omitted.
    #[serde(default)]
    pub patch_len: Option<usize>,
    #[serde(default)]
    pub basis: BasisSection,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            n_qubits: default_n_qubits(),
            n_ancilla: 0,
            depth: default_depth(),
            n_layers: default_n_layers(),
            n_patches: default_n_patches(),
            patch_len: None,
            basis: BasisSection::default(),
        }
    }
}

/// One run's full declaration: training knobs, generator geometry, dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default = "default_eval_set_size")]
    pub eval_set_size: usize,
    #[serde(default = "default_lr_disc")]
    pub lr_disc: f64,
    #[serde(default = "default_lr_gen")]
    pub lr_gen: f64,
    #[serde(default = "default_optimizer")]
    pub optimizer: Optimizer,
    #[serde(default = "default_gradient_mode")]
    pub gradient_mode: GradientMode,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_swd_projections")]
    pub swd_projections: usize,
    #[serde(default = "default_swd_seed")]
    pub swd_seed: u64,
    #[serde(default)]
    pub generator: GeneratorSection,
    pub dataset: DatasetSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fill derived fields against the loaded dataset and produce the core
    /// training configuration. `patch_len` defaults to the image length
    /// divided by the patch count.
    pub fn resolve(&mut self, dataset: &Dataset) -> Result<TrainConfig, CliError> {
        let image_len = dataset.image_len();
        let patch_len = match self.generator.patch_len {
            Some(len) => len,
            None => {
                if image_len % self.generator.n_patches != 0 {
                    return Err(CliError::Config(format!(
                        "image length {image_len} is not divisible by {} patches; \
                         set generator.patch_len explicitly",
                        self.generator.n_patches
                    )));
                }
                image_len / self.generator.n_patches
            }
        };
        self.generator.patch_len = Some(patch_len);
        let basis = BasisConfig::new(
            self.generator.basis.family,
            self.generator.basis.n_basis,
            4 * (self.generator.basis.trial + 2),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let generator = GeneratorConfig {
            n_qubits: self.generator.n_qubits,
            n_ancilla: self.generator.n_ancilla,
            depth: self.generator.depth,
            n_layers: self.generator.n_layers,
            n_patches: self.generator.n_patches,
            patch_len,
            basis,
        };
        let config = TrainConfig {
            iterations: self.iterations,
            lr_disc: self.lr_disc,
            lr_gen: self.lr_gen,
            optimizer: self.optimizer,
            seed: self.seed,
            gradient_mode: self.gradient_mode,
            fd_step: self.fd_step,
            eval_every: self.eval_every,
            eval_set_size: self.eval_set_size,
            swd_projections: self.swd_projections,
            swd_seed: self.swd_seed,
            generator_kind: self.generator.kind,
            generator,
        };
        config
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// RNG seed for the run
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of training iterations
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Metric evaluation cadence
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Discriminator learning rate
    #[arg(long)]
    pub lr_disc: Option<f64>,
    /// Generator learning rate
    #[arg(long)]
    pub lr_gen: Option<f64>,
    /// Optimizer: sgd | adam
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<Optimizer>,
    /// Gradient mode: finite-difference | parameter-shift
    #[arg(long, value_parser = parse_gradient_mode)]
    pub gradient_mode: Option<GradientMode>,
    /// Central-difference step
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Random projections per sliced Wasserstein evaluation
    #[arg(long)]
    pub swd_projections: Option<usize>,
    /// Seed of the sliced Wasserstein projections
    #[arg(long)]
    pub swd_seed: Option<u64>,
    /// Generator family: vqkan | qgan
    #[arg(long = "generator", value_parser = parse_kind)]
    pub generator_kind: Option<GeneratorKind>,
    /// Qubit count including any ancilla
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Ancilla count (0 or 1)
    #[arg(long)]
    pub ancilla: Option<usize>,
    /// Ry/CZ blocks per layer
    #[arg(long)]
    pub depth: Option<usize>,
    /// KAN layer count
    #[arg(long)]
    pub layers: Option<usize>,
    /// Patch count per image
    #[arg(long)]
    pub patches: Option<usize>,
    /// Pixels per patch
    #[arg(long)]
    pub patch_len: Option<usize>,
    /// Basis family: bspline | rbf
    #[arg(long = "basis", value_parser = parse_family)]
    pub basis_family: Option<BasisFamily>,
    /// Trainable basis functions per angle
    #[arg(long)]
    pub n_basis: Option<usize>,
    /// Grid schedule trial counter
    #[arg(long)]
    pub trial: Option<usize>,
}

fn parse_optimizer(s: &str) -> Result<Optimizer, String> {
    match s {
        "sgd" => Ok(Optimizer::Sgd),
        "adam" => Ok(Optimizer::Adam),
        other => Err(format!("unknown optimizer '{other}' (expected sgd | adam)")),
    }
}

fn parse_gradient_mode(s: &str) -> Result<GradientMode, String> {
    match s {
        "finite-difference" => Ok(GradientMode::FiniteDifference),
        "parameter-shift" => Ok(GradientMode::ParameterShift),
        other => Err(format!(
            "unknown gradient mode '{other}' (expected finite-difference | parameter-shift)"
        )),
    }
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    match s {
        "vqkan" => Ok(GeneratorKind::Vqkan),
        "qgan" => Ok(GeneratorKind::Qgan),
        other => Err(format!("unknown generator '{other}' (expected vqkan | qgan)")),
    }
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(config.seed, self.seed);
        set!(config.iterations, self.iterations);
        set!(config.eval_every, self.eval_every);
        set!(config.lr_disc, self.lr_disc);
        set!(config.lr_gen, self.lr_gen);
        set!(config.optimizer, self.optimizer);
        set!(config.gradient_mode, self.gradient_mode);
        set!(config.fd_step, self.fd_step);
        set!(config.swd_projections, self.swd_projections);
        set!(config.swd_seed, self.swd_seed);
        set!(config.generator.kind, self.generator_kind);
        set!(config.generator.n_qubits, self.qubits);
        set!(config.generator.n_ancilla, self.ancilla);
        set!(config.generator.depth, self.depth);
        set!(config.generator.n_layers, self.layers);
        set!(config.generator.n_patches, self.patches);
        set!(config.generator.basis.family, self.basis_family);
        set!(config.generator.basis.n_basis, self.n_basis);
        set!(config.generator.basis.trial, self.trial);
        if self.patch_len.is_some() {
            config.generator.patch_len = self.patch_len;
        }
    }
}
