//! Run-directory plumbing shared by the subcommands: execute one training
//! run and lay down the manifest, CSV logs, parameter snapshots, and PGM
//! image grids. Nothing is written outside the run directory.

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use vqkan_gan::data::{tile_row, write_pgm, Dataset};
use vqkan_gan::training::{train, TrainConfig, TrainOutcome};

pub struct RunArtifacts {
    pub dir: PathBuf,
    pub outcome: TrainOutcome,
    pub train_config: TrainConfig,
}

/// Execute one training run into `dir`. The manifest is written before
/// training starts; logs, snapshots, and image grids afterward.
pub fn execute_run(
    dir: &Path,
    mut config: RunConfig,
    dataset: &Dataset,
    command: String,
) -> Result<RunArtifacts, CliError> {
    fs::create_dir_all(dir)?;
    let train_config = config.resolve(dataset)?;
    let manifest = RunManifest::new(command, vec![config.seed], dataset, config);
    manifest.save(&dir.join("manifest.json"))?;

    let outcome = train(&train_config, dataset)?;
    write_artifacts(dir, &train_config, dataset, &outcome)?;
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        outcome,
        train_config,
    })
}

fn write_artifacts(
    dir: &Path,
    config: &TrainConfig,
    dataset: &Dataset,
    outcome: &TrainOutcome,
) -> Result<(), CliError> {
    let mut log_file = fs::File::create(dir.join("training_log.csv"))?;
    outcome.log.write_csv(&mut log_file)?;
    let mut timing_file = fs::File::create(dir.join("timing.csv"))?;
    outcome.log.write_timing_csv(&mut timing_file)?;

    let snapshot = outcome.model.snapshot();
    let params_file = fs::File::create(dir.join("generator_params.json"))?;
    snapshot
        .write_json(params_file)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let disc_file = fs::File::create(dir.join("discriminator_params.json"))?;
    serde_json::to_writer_pretty(disc_file, &outcome.disc)
        .map_err(|e| CliError::Runtime(format!("cannot write discriminator snapshot: {e}")))?;

    let images_dir = dir.join("images");
    fs::create_dir_all(&images_dir)?;
    let (width, height) = (dataset.width(), dataset.height());
    let eval_count = config.eval_set_size.min(dataset.len());
    let reals: Vec<Vec<f64>> = dataset.images()[..eval_count].to_vec();
    let (tiled, w, h) = tile_row(&reals, width, height);
    write_pgm(&images_dir.join("real_first.pgm"), w, h, &tiled)?;
    for (iteration, fakes) in &outcome.snapshots {
        let (tiled, w, h) = tile_row(fakes, width, height);
        write_pgm(
            &images_dir.join(format!("iter_{iteration:06}.pgm")),
            w,
            h,
            &tiled,
        )?;
    }
    Ok(())
}

/// One metrics row in the shape evaluate re-emits.
pub fn write_metrics_csv(
    path: &Path,
    mse: f64,
    swd: f64,
    kid: f64,
) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "mse,swd,kid")?;
    writeln!(file, "{mse},{swd},{kid}")?;
    Ok(())
}

/// Labeled square matrix CSV with optional cells ("NA" for runs that
/// failed). Layout: label in the corner, seed labels across and down.
pub fn write_labeled_matrix(
    path: &Path,
    label: &str,
    seeds: &[u64],
    cell: impl Fn(usize, usize) -> Option<String>,
) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    write!(file, "{label}")?;
    for s in seeds {
        write!(file, ",{s}")?;
    }
    writeln!(file)?;
    for (i, s) in seeds.iter().enumerate() {
        write!(file, "{s}")?;
        for j in 0..seeds.len() {
            match cell(i, j) {
                Some(v) => write!(file, ",{v}")?,
                None => write!(file, ",NA")?,
            }
        }
        writeln!(file)?;
    }
    Ok(())
}
