//! The adversarial training loop: cross-entropy losses, a single-sample
//! iteration schedule (one real image per step, fresh latent per step),
//! discriminator backprop updates, and generator updates through the quantum
//! circuit by central finite differences or the parameter-shift rule.
//!
//! Update order within one iteration is discriminator first, then the
//! generator stepping against the updated discriminator. Probabilities are
//! clamped to [1e-12, 1 - 1e-12] before every logarithm, so no loss value is
//! ever NaN or infinite; gradients are zero on the clamp plateau.

use crate::data::Dataset;
use crate::discriminator::{
    adam_step, sgd_step, AdamState, DiscError, DiscriminatorMlp, ADAM_DEFAULTS,
};
use crate::generator::{
    postprocess_directional, postprocess_patch, probs_from_angles, GeneratorError, GeneratorKind,
    GeneratorModel, LatentVector,
};
use crate::metrics::{kid, mse, sliced_wasserstein, ImageSet, MetricError};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

/// Floor and ceiling for probabilities fed to logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Discriminator(#[from] DiscError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset images have {got} pixels but the generator emits {expected}")]
    DatasetShapeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    FiniteDifference,
    ParameterShift,
}

/// Everything one training run needs besides the dataset itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub lr_disc: f64,
    pub lr_gen: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub gradient_mode: GradientMode,
    pub fd_step: f64,
    pub eval_every: usize,
    pub eval_set_size: usize,
    pub swd_projections: usize,
    pub swd_seed: u64,
    pub generator_kind: GeneratorKind,
    pub generator: crate::generator::GeneratorConfig,
}

impl TrainConfig {
    /// Headline defaults: SGD at 0.1 / 0.001, finite differences with step
    /// 1e-3, metrics every 10 iterations on 8 fixed latents.
    pub fn new(generator_kind: GeneratorKind, generator: crate::generator::GeneratorConfig) -> Self {
        Self {
            iterations: 1000,
            lr_disc: 0.1,
            lr_gen: 0.001,
            optimizer: Optimizer::Sgd,
            seed: 42,
            gradient_mode: GradientMode::FiniteDifference,
            fd_step: 1e-3,
            eval_every: 10,
            eval_set_size: 8,
            swd_projections: 50,
            swd_seed: 12345,
            generator_kind,
            generator,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.generator.validate()?;
        if self.iterations < 1 {
            return Err(TrainError::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(self.lr_disc >= 0.0 && self.lr_disc.is_finite())
            || !(self.lr_gen >= 0.0 && self.lr_gen.is_finite())
        {
            return Err(TrainError::InvalidConfig(
                "learning rates must be finite and non-negative".into(),
            ));
        }
        if !(self.fd_step > 0.0) {
            return Err(TrainError::InvalidConfig("fd_step must be positive".into()));
        }
        if self.eval_every < 1 {
            return Err(TrainError::InvalidConfig("eval_every must be >= 1".into()));
        }
        if self.eval_set_size < 2 {
            return Err(TrainError::InvalidConfig(
                "eval_set_size must be >= 2 for the kernel metric".into(),
            ));
        }
        if self.swd_projections < 1 {
            return Err(TrainError::InvalidConfig(
                "swd_projections must be >= 1".into(),
            ));
        }
        if self.gradient_mode == GradientMode::ParameterShift
            && self.generator_kind == GeneratorKind::Vqkan
            && self.generator.n_layers != 1
        {
            return Err(TrainError::InvalidConfig(
                "parameter-shift gradients need a single-layer ansatz; use finite differences"
                    .into(),
            ));
        }
        Ok(())
    }

    fn validate_against(&self, dataset: &Dataset) -> Result<(), TrainError> {
        self.validate()?;
        if dataset.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        if dataset.image_len() != self.generator.image_len() {
            return Err(TrainError::DatasetShapeMismatch {
                expected: self.generator.image_len(),
                got: dataset.image_len(),
            });
        }
        if self.iterations >= self.eval_every && dataset.len() < 2 {
            return Err(TrainError::InvalidConfig(
                "metric evaluation needs at least 2 dataset images".into(),
            ));
        }
        Ok(())
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// d/dp of -ln(clamp(p)): zero on the plateau, -1/p inside.
fn d_neg_log(p: f64) -> f64 {
    if p <= PROB_CLAMP || p >= 1.0 - PROB_CLAMP {
        0.0
    } else {
        -1.0 / p
    }
}

/// Binary cross-entropy of the discriminator on one (real, fake) pair:
/// -[ln D(real) + ln(1 - D(fake))].
pub fn disc_loss(d_real: f64, d_fake: f64) -> f64 {
    -(clamp_prob(d_real).ln() + clamp_prob(1.0 - d_fake).ln())
}

/// Non-saturating generator objective -ln D(fake), minimized.
pub fn gen_loss(d_fake: f64) -> f64 {
    -clamp_prob(d_fake).ln()
}

/// Generator-loss gradients with respect to every patch coefficient, one
/// vector per patch.
pub fn gen_gradient(
    model: &GeneratorModel,
    disc: &DiscriminatorMlp,
    z: &LatentVector,
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<Vec<f64>>, TrainError> {
    match mode {
        GradientMode::FiniteDifference => fd_gradient(model, disc, z, fd_step),
        GradientMode::ParameterShift => shift_gradient(model, disc, z),
    }
}

/// Central difference of the full pipeline loss per coefficient. Only the
/// perturbed patch is re-run; when the circuit angles are an explicit grid
/// (single layer) just the affected angle slot is recomputed.
fn fd_gradient(
    model: &GeneratorModel,
    disc: &DiscriminatorMlp,
    z: &LatentVector,
    h: f64,
) -> Result<Vec<Vec<f64>>, TrainError> {
    let patch_len = model.config().patch_len;
    let n_patches = model.n_patches();
    let base_patches: Vec<Vec<f64>> = (0..n_patches)
        .map(|p| model.generate_patch(p, z).map(|out| out.pixels))
        .collect::<Result<_, _>>()?;
    let mut image: Vec<f64> = base_patches.concat();
    let mut grads = vec![vec![0.0; model.patch_coeff_len()]; n_patches];
    let mut scratch = model.clone();
    let gridded = model.supports_angle_grid();
    for p in 0..n_patches {
        let base_grid = if gridded {
            Some(model.angle_grid(p, z)?)
        } else {
            None
        };
        for k in 0..model.patch_coeff_len() {
            let orig = scratch.patch_coefficients(p)[k];
            let mut losses = [0.0f64; 2];
            for (side, delta) in [h, -h].into_iter().enumerate() {
                scratch.patch_coefficients_mut(p)[k] = orig + delta;
                let pixels = match &base_grid {
                    Some(grid) => {
                        let slot = scratch.slot_of_coeff(k);
                        let mut shifted = grid.clone();
                        shifted[slot] = scratch.slot_angle(p, slot, z);
                        postprocess_patch(&probs_from_angles(z, &shifted)?, model.config()).pixels
                    }
                    None => scratch.generate_patch(p, z)?.pixels,
                };
                image[p * patch_len..(p + 1) * patch_len].copy_from_slice(&pixels);
                losses[side] = gen_loss(disc.forward(&image)?);
            }
            scratch.patch_coefficients_mut(p)[k] = orig;
            grads[p][k] = (losses[0] - losses[1]) / (2.0 * h);
        }
        image[p * patch_len..(p + 1) * patch_len].copy_from_slice(&base_patches[p]);
    }
    Ok(grads)
}

/// Parameter-shift route: exact d(probs)/d(angle) from evaluations at
/// angle +- pi/2, chained through post-selection, truncation, max-scaling,
/// the discriminator's input gradient, and d(angle)/d(coefficient).
fn shift_gradient(
    model: &GeneratorModel,
    disc: &DiscriminatorMlp,
    z: &LatentVector,
) -> Result<Vec<Vec<f64>>, TrainError> {
    let config = model.config();
    let patch_len = config.patch_len;
    let n_patches = model.n_patches();
    let mut image = Vec::with_capacity(config.image_len());
    let mut raw_probs = Vec::with_capacity(n_patches);
    let mut grids = Vec::with_capacity(n_patches);
    for p in 0..n_patches {
        let grid = model.angle_grid(p, z)?;
        let raw = probs_from_angles(z, &grid)?;
        image.extend(postprocess_patch(&raw, config).pixels);
        raw_probs.push(raw);
        grids.push(grid);
    }
    let mut grads = vec![vec![0.0; model.patch_coeff_len()]; n_patches];
    let d_fake = disc.forward(&image)?;
    let upstream = d_neg_log(d_fake);
    if upstream == 0.0 {
        return Ok(grads);
    }
    let input_grad = disc.backward(&image, upstream)?.input;
    for p in 0..n_patches {
        let pixel_grad = &input_grad[p * patch_len..(p + 1) * patch_len];
        let grid = &grids[p];
        for slot in 0..grid.len() {
            let mut shifted = grid.clone();
            shifted[slot] = grid[slot] + FRAC_PI_2;
            let plus = probs_from_angles(z, &shifted)?;
            shifted[slot] = grid[slot] - FRAC_PI_2;
            let minus = probs_from_angles(z, &shifted)?;
            let d_probs: Vec<f64> = plus
                .as_slice()
                .iter()
                .zip(minus.as_slice())
                .map(|(a, b)| (a - b) / 2.0)
                .collect();
            let d_pixels = postprocess_directional(&raw_probs[p], &d_probs, config);
            let dl_dphi: f64 = pixel_grad.iter().zip(&d_pixels).map(|(g, d)| g * d).sum();
            model.accumulate_coeff_grad(p, slot, dl_dphi, z, &mut grads[p]);
        }
    }
    Ok(grads)
}

/// Losses and flags from one adversarial step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub loss_disc: f64,
    pub loss_gen: f64,
    pub zero_fallback: bool,
}

/// Mutable state threaded through the iteration loop.
#[derive(Debug, Clone)]
pub struct TrainState {
    config: TrainConfig,
    model: GeneratorModel,
    disc: DiscriminatorMlp,
    adam_disc: Option<AdamState>,
    adam_gen: Option<Vec<AdamState>>,
}

impl TrainState {
    pub fn new(config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let (disc_seed, _, _) = derive_seeds(config.seed);
        let model = GeneratorModel::new(config.generator_kind, config.generator.clone())?;
        let disc = DiscriminatorMlp::init(config.generator.image_len(), disc_seed);
        let adam = config.optimizer == Optimizer::Adam;
        let adam_gen = adam.then(|| {
            (0..model.n_patches())
                .map(|_| AdamState::new(model.patch_coeff_len()))
                .collect()
        });
        let adam_disc = adam.then(|| AdamState::new(disc.parameter_count()));
        Ok(Self {
            config,
            model,
            disc,
            adam_disc,
            adam_gen,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn model(&self) -> &GeneratorModel {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut GeneratorModel {
        &mut self.model
    }

    pub fn disc(&self) -> &DiscriminatorMlp {
        &self.disc
    }

    pub fn disc_mut(&mut self) -> &mut DiscriminatorMlp {
        &mut self.disc
    }

    /// One iteration: generate a fake, update the discriminator on the
    /// (real, fake) pair, then update the generator against the already
    /// updated discriminator.
    pub fn step(&mut self, real_image: &[f64], z: &LatentVector) -> Result<StepRecord, TrainError> {
        let fake = self.model.generate_image(z)?;
        let d_real = self.disc.forward(real_image)?;
        let d_fake = self.disc.forward(&fake.pixels)?;
        let loss_disc = disc_loss(d_real, d_fake);

        let real_grads = self.disc.backward(real_image, d_neg_log(d_real))?;
        let fake_grads = self.disc.backward(&fake.pixels, -d_neg_log(1.0 - d_fake))?;
        let mut combined = real_grads;
        for (c, f) in combined.params.iter_mut().zip(&fake_grads.params) {
            *c += f;
        }
        match self.adam_disc.as_mut() {
            Some(state) => adam_step(
                state,
                self.disc.params_mut(),
                &combined.params,
                self.config.lr_disc,
                ADAM_DEFAULTS,
            )?,
            None => sgd_step(self.disc.params_mut(), &combined.params, self.config.lr_disc)?,
        }

        let loss_gen = gen_loss(self.disc.forward(&fake.pixels)?);
        let gen_grads = gen_gradient(
            &self.model,
            &self.disc,
            z,
            self.config.gradient_mode,
            self.config.fd_step,
        )?;
        for (p, grad) in gen_grads.iter().enumerate() {
            match self.adam_gen.as_mut() {
                Some(states) => adam_step(
                    &mut states[p],
                    self.model.patch_coefficients_mut(p),
                    grad,
                    self.config.lr_gen,
                    ADAM_DEFAULTS,
                )?,
                None => sgd_step(self.model.patch_coefficients_mut(p), grad, self.config.lr_gen)?,
            }
        }
        Ok(StepRecord {
            loss_disc,
            loss_gen,
            zero_fallback: fake.zero_fallback,
        })
    }
}

/// Metrics of one evaluation point: fixed-latent images against the first
/// dataset images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    pub mse: f64,
    pub swd: f64,
    pub kid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub loss_disc: f64,
    pub loss_gen: f64,
    pub zero_fallback: bool,
    pub wall_ms: f64,
    pub eval: Option<EvalRecord>,
}

/// Per-iteration records of one run. The deterministic columns and the
/// wall-clock timings flush to separate CSV files so that identically seeded
/// runs produce byte-identical logs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub seed: u64,
    pub records: Vec<IterationRecord>,
}

impl TrainingLog {
    /// Deterministic columns: losses, flags, and metric values. Metric cells
    /// are empty on non-evaluation iterations.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "iteration,loss_disc,loss_gen,postselect_fallback,mse,swd,kid")?;
        for r in &self.records {
            write!(
                w,
                "{},{},{},{}",
                r.iteration, r.loss_disc, r.loss_gen, r.zero_fallback as u8
            )?;
            match &r.eval {
                Some(e) => writeln!(w, ",{},{},{}", e.mse, e.swd, e.kid)?,
                None => writeln!(w, ",,,")?,
            }
        }
        Ok(())
    }

    /// Wall-clock milliseconds per iteration; not reproducible across runs.
    pub fn write_timing_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "iteration,wall_ms")?;
        for r in &self.records {
            writeln!(w, "{},{}", r.iteration, r.wall_ms)?;
        }
        Ok(())
    }

    /// (iteration, metrics) at every evaluation point.
    pub fn eval_points(&self) -> Vec<(usize, EvalRecord)> {
        self.records
            .iter()
            .filter_map(|r| r.eval.map(|e| (r.iteration, e)))
            .collect()
    }

    pub fn swd_series(&self) -> Vec<f64> {
        self.eval_points().iter().map(|(_, e)| e.swd).collect()
    }

    pub fn all_values_finite(&self) -> bool {
        self.records.iter().all(|r| {
            r.loss_disc.is_finite()
                && r.loss_gen.is_finite()
                && r.eval.map_or(true, |e| {
                    e.mse.is_finite() && e.swd.is_finite() && e.kid.is_finite()
                })
        })
    }
}

/// A finished run: the log, the trained networks, the fixed evaluation
/// latents, and the fixed-latent image snapshots taken at evaluation points.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub log: TrainingLog,
    pub model: GeneratorModel,
    pub disc: DiscriminatorMlp,
    pub eval_latents: Vec<LatentVector>,
    pub snapshots: Vec<(usize, Vec<Vec<f64>>)>,
}

/// Sub-seeds for the discriminator init, the fixed evaluation latents, and
/// the per-iteration latent stream, all derived from the run seed.
fn derive_seeds(seed: u64) -> (u64, u64, u64) {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    (seeder.next_u64(), seeder.next_u64(), seeder.next_u64())
}

fn latents_from(seed: u64, count: usize, n_qubits: usize) -> Vec<LatentVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| LatentVector::sample(&mut rng, n_qubits))
        .collect()
}

/// The fixed evaluation latents a run with this config uses, reconstructable
/// from the config alone.
pub fn evaluation_latents(config: &TrainConfig) -> Vec<LatentVector> {
    let (_, eval_seed, _) = derive_seeds(config.seed);
    latents_from(eval_seed, config.eval_set_size, config.generator.n_qubits)
}

/// Run the full loop: cycle the dataset in index order, one image per
/// iteration, fresh latent per iteration, metrics every `eval_every`
/// iterations on the fixed latents against the first dataset images.
pub fn train(config: &TrainConfig, dataset: &Dataset) -> Result<TrainOutcome, TrainError> {
    config.validate_against(dataset)?;
    let (_, eval_seed, latent_seed) = derive_seeds(config.seed);
    let mut state = TrainState::new(config.clone())?;
    let mut latent_rng = ChaCha8Rng::seed_from_u64(latent_seed);

    let eval_count = config.eval_set_size.min(dataset.len());
    let eval_latents = latents_from(eval_seed, config.eval_set_size, config.generator.n_qubits);
    let real_eval = ImageSet::new(dataset.images()[..eval_count].to_vec())?;

    let mut records = Vec::with_capacity(config.iterations);
    let mut snapshots = Vec::new();
    for iteration in 1..=config.iterations {
        let real = &dataset.images()[(iteration - 1) % dataset.len()];
        let z = LatentVector::sample(&mut latent_rng, config.generator.n_qubits);
        let started = Instant::now();
        let step = state.step(real, &z)?;
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;

        let eval = if iteration % config.eval_every == 0 {
            let fakes: Vec<Vec<f64>> = eval_latents[..eval_count]
                .iter()
                .map(|z| state.model().generate_image(z).map(|img| img.pixels))
                .collect::<Result<_, _>>()?;
            let fake_set = ImageSet::new(fakes.clone())?;
            let record = EvalRecord {
                mse: mse(&fake_set, &real_eval)?,
                swd: sliced_wasserstein(
                    &fake_set,
                    &real_eval,
                    config.swd_projections,
                    config.swd_seed,
                )?,
                kid: kid(&fake_set, &real_eval)?,
            };
            snapshots.push((iteration, fakes));
            Some(record)
        } else {
            None
        };

        records.push(IterationRecord {
            iteration,
            loss_disc: step.loss_disc,
            loss_gen: step.loss_gen,
            zero_fallback: step.zero_fallback,
            wall_ms,
            eval,
        });
    }
    let TrainState { model, disc, .. } = state;
    Ok(TrainOutcome {
        log: TrainingLog {
            seed: config.seed,
            records,
        },
        model,
        disc,
        eval_latents,
        snapshots,
    })
}
