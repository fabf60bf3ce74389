use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gamow_lab::Direction;
use gamow_lab_cli::config::{Experiment, Format, RunConfig, TimesConfig};
use gamow_lab_cli::error::{CliError, EXIT_OK, EXIT_VALIDATION};
use log::LevelFilter;

/// Numerical experiments with resonances, Gamow states and Hardy-space
/// semigroups.
#[derive(Parser)]
#[command(name = "gamow-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config file.
    Run(Overrides),
    /// Split a function into its H2_plus and H2_minus parts.
    Decompose(Overrides),
    /// Evolve the resonance amplitude and track its Hardy leakage.
    Evolve(Overrides),
    /// Survival amplitude of a Gamow state.
    DecayCurve(Overrides),
    /// Fit a Breit-Wigner line shape.
    FitPole(Overrides),
    /// Pole and background parts of an S-matrix element.
    SmatrixDecompose(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Input CSV (decompose, fit-pole, smatrix-decompose).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative Gaussian noise on synthetic line shapes.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long = "e-r", allow_hyphen_values = true)]
    e_r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Evaluation time; repeat for several.
    #[arg(long = "t", allow_hyphen_values = true)]
    t: Vec<f64>,
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Direction>,
    /// Evolve without enforcing t >= 0.
    #[arg(long)]
    diagnostic: bool,
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "schrodinger_state" | "schrodinger-state" => Ok(Direction::SchrodingerState),
        "heisenberg_observable" | "heisenberg-observable" => Ok(Direction::HeisenbergObservable),
        _ => Err(format!("unknown direction {s:?}")),
    }
}

impl Command {
    fn split(self) -> (Option<Experiment>, Overrides) {
        match self {
            Command::Run(o) => (None, o),
            Command::Decompose(o) => (Some(Experiment::Decompose), o),
            Command::Evolve(o) => (Some(Experiment::Evolve), o),
            Command::DecayCurve(o) => (Some(Experiment::DecayCurve), o),
            Command::FitPole(o) => (Some(Experiment::FitPole), o),
            Command::SmatrixDecompose(o) => (Some(Experiment::SmatrixDecompose), o),
        }
    }
}

fn build_config(experiment: Option<Experiment>, o: Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(e) = experiment {
        cfg.experiment = Some(e);
    }
    if o.e_r.is_some() || o.gamma.is_some() {
        let r = cfg.resonance.get_or_insert_with(Default::default);
        if let Some(e_r) = o.e_r {
            r.e_r = e_r;
        }
        if let Some(gamma) = o.gamma {
            r.gamma = gamma;
        }
    }
    if !o.t.is_empty() {
        cfg.times = Some(TimesConfig::List(o.t));
    }
    if o.output.is_some() {
        cfg.io.output_path = o.output;
    }
    if o.format.is_some() {
        cfg.io.format = o.format;
    }
    if o.input.is_some() {
        cfg.io.input_csv = o.input;
    }
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(noise) = o.noise {
        cfg.noise = noise;
    }
    if o.direction.is_some() {
        cfg.direction = o.direction;
    }
    cfg.diagnostic |= o.diagnostic;
    Ok(cfg)
}

fn init_logging() -> Result<(), CliError> {
    let level = match std::env::var("GAMOW_LAB_LOG").as_deref() {
        Err(_) | Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        Ok(other) => {
            return Err(CliError::validation(
                "GAMOW_LAB_LOG",
                format!("expected quiet, info or debug, got {other:?}"),
            ))
        }
    };
    env_logger::Builder::new().filter_level(level).init();
    Ok(())
}

fn execute(cli: Cli) -> Result<String, CliError> {
    init_logging()?;
    let (experiment, overrides) = cli.command.split();
    let resolved = build_config(experiment, overrides)?.resolve()?;
    let artifact = gamow_lab_cli::run(&resolved)?;
    std::fs::write(&resolved.output_path, &artifact.bytes).map_err(|source| CliError::Io {
        path: resolved.output_path.clone(),
        source,
    })?;
    Ok(format!("{} -> {}", artifact.summary, resolved.output_path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
