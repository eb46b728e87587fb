//! Command-line entry point: train, evaluate, seed-study, and sweep
//! subcommands around the quantum KAN adversarial trainer.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
//! failure. `VQKAN_GAN_WORKERS` caps the worker threads used by seed
//! studies and sweeps.

mod config;
mod error;
mod manifest;
mod runner;

use clap::{Parser, Subcommand};
use config::{Overrides, RunConfig};
use error::CliError;
use manifest::RunManifest;
use rayon::prelude::*;
use runner::{execute_run, write_labeled_matrix, write_metrics_csv};
use std::path::PathBuf;
use std::process::ExitCode;
use vqkan_gan::generator::{GeneratorModel, GeneratorSnapshot};
use vqkan_gan::metrics::{bonferroni_matrix, kid, mse, sliced_wasserstein, ImageSet, SeedGroup};
use vqkan_gan::training::evaluation_latents;

/// Seed list of the reproduction study.
const STUDY_SEEDS: [u64; 16] = [
    42, 2, 10, 13, 0, 3407, 7120, 10000, 11111, 16384, 17171, 130000, 14480, 11668, 500001,
    620000,
];

#[derive(Parser)]
#[command(
    name = "vqkan-gan",
    version,
    about = "Adversarial trainer for a quantum Kolmogorov-Arnold Born-machine generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one training job into a fresh run directory.
    Train {
        /// JSON run configuration
        #[arg(long)]
        config: PathBuf,
        /// Output run directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute the fixed-latent metrics from a finished run's snapshot.
    Evaluate {
        /// Run directory produced by `train`
        #[arg(long)]
        run: PathBuf,
        /// Override the sliced Wasserstein projection seed
        #[arg(long)]
        swd_seed: Option<u64>,
    },
    /// Train once per seed and emit pairwise Welch-t / Bonferroni matrices
    /// over the per-seed SWD series.
    SeedStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated seed list (defaults to the 16-seed study list)
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Uncorrected significance level
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Bonferroni correction divisor
        #[arg(long, default_value_t = 240.0)]
        correction_divisor: f64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train across a depth axis (one run per depth per seed) and aggregate
    /// metric and timing curves into one CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Depth axis: "1-8" or a comma list like "1,2,4"
        #[arg(long, default_value = "1-8")]
        depths: String,
        /// Comma-separated seeds (defaults to the config seed)
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("VQKAN_GAN_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            config,
            out,
            overrides,
        } => cmd_train(&config, &out, &overrides),
        Command::Evaluate { run, swd_seed } => cmd_evaluate(&run, swd_seed),
        Command::SeedStudy {
            config,
            out,
            seeds,
            alpha,
            correction_divisor,
            overrides,
        } => cmd_seed_study(&config, &out, seeds, alpha, correction_divisor, &overrides),
        Command::Sweep {
            config,
            out,
            depths,
            seeds,
            overrides,
        } => cmd_sweep(&config, &out, &depths, seeds, &overrides),
    }
}

fn load_config(path: &PathBuf, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config);
    Ok(config)
}

fn cmd_train(config_path: &PathBuf, out: &PathBuf, overrides: &Overrides) -> Result<(), CliError> {
    let config = load_config(config_path, overrides)?;
    let dataset = config.dataset.load()?;
    let artifacts = execute_run(out, config, &dataset, command_echo())?;
    let last = artifacts
        .outcome
        .log
        .records
        .last()
        .expect("at least one iteration");
    println!(
        "run finished: {} iterations, final loss_disc {} loss_gen {}",
        last.iteration, last.loss_disc, last.loss_gen
    );
    if let Some((iteration, eval)) = artifacts.outcome.log.eval_points().last() {
        println!(
            "final metrics at iteration {iteration}: mse {} swd {} kid {}",
            eval.mse, eval.swd, eval.kid
        );
    }
    println!("artifacts in {}", artifacts.dir.display());
    Ok(())
}

fn cmd_evaluate(run: &PathBuf, swd_seed: Option<u64>) -> Result<(), CliError> {
    let manifest = RunManifest::load(&run.join("manifest.json"))?;
    let mut config = manifest.config.clone();
    if let Some(seed) = swd_seed {
        config.swd_seed = seed;
    }
    let dataset = config.dataset.load()?;
    let train_config = config.resolve(&dataset)?;

    let snapshot_path = run.join("generator_params.json");
    let file = std::fs::File::open(&snapshot_path).map_err(|e| {
        CliError::Data(format!(
            "missing parameter snapshot {}: {e}",
            snapshot_path.display()
        ))
    })?;
    let snapshot =
        GeneratorSnapshot::read_json(file).map_err(|e| CliError::Data(e.to_string()))?;
    let model = GeneratorModel::from_snapshot(&snapshot)?;

    let eval_count = train_config.eval_set_size.min(dataset.len());
    let latents = evaluation_latents(&train_config);
    let fakes: Vec<Vec<f64>> = latents[..eval_count]
        .iter()
        .map(|z| model.generate_image(z).map(|img| img.pixels))
        .collect::<Result<_, _>>()?;
    let fake_set = ImageSet::new(fakes).map_err(|e| CliError::Runtime(e.to_string()))?;
    let real_set = ImageSet::new(dataset.images()[..eval_count].to_vec())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mse_v = mse(&fake_set, &real_set).map_err(|e| CliError::Runtime(e.to_string()))?;
    let swd_v = sliced_wasserstein(
        &fake_set,
        &real_set,
        train_config.swd_projections,
        train_config.swd_seed,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let kid_v = kid(&fake_set, &real_set).map_err(|e| CliError::Runtime(e.to_string()))?;

    write_metrics_csv(&run.join("evaluate_metrics.csv"), mse_v, swd_v, kid_v)?;
    println!("mse,swd,kid");
    println!("{mse_v},{swd_v},{kid_v}");
    Ok(())
}

fn cmd_seed_study(
    config_path: &PathBuf,
    out: &PathBuf,
    seeds: Option<Vec<u64>>,
    alpha: f64,
    correction_divisor: f64,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let config = load_config(config_path, overrides)?;
    let seeds = seeds.unwrap_or_else(|| STUDY_SEEDS.to_vec());
    if seeds.len() < 2 {
        return Err(CliError::Config("seed study needs at least 2 seeds".into()));
    }
    for (i, s) in seeds.iter().enumerate() {
        if seeds[..i].contains(s) {
            return Err(CliError::Config(format!("duplicate seed {s} in list")));
        }
    }
    let dataset = config.dataset.load()?;
    std::fs::create_dir_all(out)?;
    RunManifest::new(command_echo(), seeds.clone(), &dataset, config.clone())
        .save(&out.join("manifest.json"))?;

    let echo = command_echo();
    let results: Vec<(u64, Result<Vec<f64>, CliError>)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut run_config = config.clone();
            run_config.seed = seed;
            let dir = out.join(format!("seed_{seed}"));
            let series = execute_run(&dir, run_config, &dataset, echo.clone())
                .map(|artifacts| artifacts.outcome.log.swd_series());
            (seed, series)
        })
        .collect();

    let mut groups = Vec::new();
    let mut success_index = vec![None; seeds.len()];
    for (i, (seed, result)) in results.iter().enumerate() {
        match result {
            Ok(series) => {
                success_index[i] = Some(groups.len());
                groups.push(SeedGroup {
                    seed: *seed,
                    values: series.clone(),
                });
            }
            Err(e) => eprintln!("seed {seed} failed: {e}"),
        }
    }
    if groups.len() < 2 {
        return Err(CliError::Runtime(
            "fewer than 2 seeds finished; no matrices to build".into(),
        ));
    }
    let matrix = bonferroni_matrix(&groups, alpha, correction_divisor)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let lookup = |i: usize, j: usize| -> Option<(usize, usize)> {
        Some((success_index[i]?, success_index[j]?))
    };
    write_labeled_matrix(&out.join("t_matrix.csv"), "t_value", &seeds, |i, j| {
        lookup(i, j).map(|(a, b)| format!("{}", matrix.t[a][b]))
    })?;
    write_labeled_matrix(&out.join("p_matrix.csv"), "p_value", &seeds, |i, j| {
        lookup(i, j).map(|(a, b)| format!("{}", matrix.p[a][b]))
    })?;
    write_labeled_matrix(&out.join("significance.csv"), "significant", &seeds, |i, j| {
        lookup(i, j).map(|(a, b)| if matrix.significant[a][b] { "1" } else { "0" }.to_string())
    })?;
    println!(
        "seed study finished: {} of {} seeds, threshold p < {}",
        groups.len(),
        seeds.len(),
        matrix.threshold
    );
    println!("matrices in {}", out.display());
    Ok(())
}

fn parse_depths(spec: &str) -> Result<Vec<usize>, CliError> {
    let spec = spec.trim();
    let depths: Vec<usize> = if let Some((lo, hi)) = spec.split_once('-') {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad depth range '{spec}'")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad depth range '{spec}'")))?;
        if lo > hi {
            return Err(CliError::Config(format!("bad depth range '{spec}'")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|part| {
                part.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad depth '{part}'")))
            })
            .collect::<Result<_, _>>()?
    };
    if depths.is_empty() || depths.contains(&0) {
        return Err(CliError::Config("depths must be positive".into()));
    }
    Ok(depths)
}

fn cmd_sweep(
    config_path: &PathBuf,
    out: &PathBuf,
    depths: &str,
    seeds: Option<Vec<u64>>,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let config = load_config(config_path, overrides)?;
    let depths = parse_depths(depths)?;
    let seeds = seeds.unwrap_or_else(|| vec![config.seed]);
    if seeds.is_empty() {
        return Err(CliError::Config("sweep needs at least one seed".into()));
    }
    let dataset = config.dataset.load()?;
    std::fs::create_dir_all(out)?;
    RunManifest::new(command_echo(), seeds.clone(), &dataset, config.clone())
        .save(&out.join("manifest.json"))?;

    let echo = command_echo();
    let jobs: Vec<(usize, u64)> = depths
        .iter()
        .flat_map(|&d| seeds.iter().map(move |&s| (d, s)))
        .collect();
    let results: Vec<Result<(usize, u64, Vec<(usize, f64, f64, f64, f64)>), CliError>> = jobs
        .par_iter()
        .map(|&(depth, seed)| {
            let mut run_config = config.clone();
            run_config.seed = seed;
            run_config.generator.depth = depth;
            let dir = out.join(format!("depth_{depth}_seed_{seed}"));
            let artifacts = execute_run(&dir, run_config, &dataset, echo.clone())?;
            let mut rows = Vec::new();
            let mut cumulative_ms = 0.0;
            let mut evals = artifacts.outcome.log.eval_points().into_iter();
            let mut next = evals.next();
            for record in &artifacts.outcome.log.records {
                cumulative_ms += record.wall_ms;
                if let Some((iteration, eval)) = next {
                    if iteration == record.iteration {
                        rows.push((iteration, eval.mse, eval.swd, eval.kid, cumulative_ms));
                        next = evals.next();
                    }
                }
            }
            Ok((depth, seed, rows))
        })
        .collect();

    use std::io::Write;
    let mut csv = std::fs::File::create(out.join("sweep.csv"))?;
    writeln!(csv, "depth,seed,iteration,mse,swd,kid,wall_ms")?;
    for result in results {
        let (depth, seed, rows) = result?;
        for (iteration, mse_v, swd_v, kid_v, wall) in rows {
            writeln!(csv, "{depth},{seed},{iteration},{mse_v},{swd_v},{kid_v},{wall}")?;
        }
    }
    println!(
        "sweep finished: {} depths x {} seeds, results in {}",
        depths.len(),
        seeds.len(),
        out.display()
    );
    Ok(())
}
