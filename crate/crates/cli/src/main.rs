use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use jcas_core::detect::Method;
use jcas_core::experiments::{
    calibration_table, dump_trials, run_experiment, write_calibration, write_rows, Experiment,
    ExperimentConfig, RunManifest, SweepConfig,
};
use jcas_core::precoding::Mode;

/// Monte Carlo detection experiments for bistatic JCAS sensing.
#[derive(Parser)]
#[command(name = "jcas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv plus manifest.json.
    Run(RunArgs),
    /// Tabulate calibrated ratio thresholds for a list of false-alarm targets.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct Overrides {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep specification, e.g. `snr_db=-10,-5,0`.
    #[arg(long)]
    sweep: Option<String>,
    /// Set the frame length to N on an rx_antennas sweep.
    #[arg(long)]
    couple_slots: bool,
    /// Resource allocation mode.
    #[arg(long, value_parser = ["tdm", "cm"])]
    mode: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// Monte Carlo trials per hypothesis and sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated detectors out of ratio, mdl, aic.
    #[arg(long, value_delimiter = ',')]
    detectors: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also dump the received matrices of the first N trials.
    #[arg(long, value_name = "N")]
    dump_trials: Option<usize>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Overrides,
    /// Null-hypothesis trials per table row.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Target false-alarm probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.05,0.1")]
    pfa: Vec<f64>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Overrides) -> jcas_core::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(mode) = &args.mode {
        cfg.beamforming.mode = mode.parse::<Mode>()?;
    }
    if let Some(spec) = &args.sweep {
        let mut sweep = SweepConfig::parse(spec)?;
        sweep.couple_slots = args.couple_slots;
        cfg.sweep = Some(sweep);
    } else if args.couple_slots {
        if let Some(sweep) = cfg.sweep.as_mut() {
            sweep.couple_slots = true;
        }
    }
    Ok(cfg)
}

fn run(args: &RunArgs) -> anyhow::Result<()> {
    let start = Instant::now();
    let mut cfg = load(&args.common)?;
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(list) = &args.detectors {
        cfg.detection.methods = list
            .iter()
            .map(|s| s.parse::<Method>())
            .collect::<jcas_core::Result<_>>()?;
    }
    cfg.validate()?;

    let output = run_experiment(&cfg)?;
    for w in &output.warnings {
        warn!("{w}");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let results = args.out.join("results.csv");
    write_rows(&output.rows, std::fs::File::create(&results)?)?;
    if let Some(n) = args.dump_trials {
        let exp = Experiment::from_config(&without_sweep(&cfg))?;
        dump_trials(&exp, n, std::fs::File::create(args.out.join("trials.csv"))?)?;
    }
    let manifest = RunManifest::new(
        &cfg,
        start.elapsed().as_secs_f64(),
        output.warnings,
        "results.csv",
    );
    manifest.write(&args.out.join("manifest.json"))?;
    info!("wrote {} rows to {}", output.rows.len(), results.display());
    Ok(())
}

/// First sweep point of `cfg`, or `cfg` itself.
fn without_sweep(cfg: &ExperimentConfig) -> ExperimentConfig {
    match &cfg.sweep {
        Some(s) if s.axis != jcas_core::experiments::Axis::Pfa => cfg
            .with_axis_value(s.axis, s.values[0], s.couple_slots)
            .unwrap_or_else(|_| cfg.clone()),
        _ => {
            let mut c = cfg.clone();
            c.sweep = None;
            c
        }
    }
}

fn calibrate(args: &CalibrateArgs) -> anyhow::Result<()> {
    let cfg = load(&args.common)?;
    cfg.validate()?;
    let table = calibration_table(&cfg, &args.pfa, args.trials)?;
    match &args.out {
        Some(path) => write_to(path, |f| write_calibration(&table, f))?,
        None => write_calibration(&table, std::io::stdout().lock())?,
    }
    Ok(())
}

fn write_to(
    path: &Path,
    f: impl FnOnce(std::fs::File) -> jcas_core::Result<()>,
) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    f(std::fs::File::create(path)?)?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<jcas_core::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Calibrate(args) => calibrate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
