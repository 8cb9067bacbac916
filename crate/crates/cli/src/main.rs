use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ablation_cli::commands::{
    self, CalibrateArgs, GenerateArgs, ModelChoice, PropagateArgs, SimulateArgs,
};
use ablation_cli::config::PipelineConfig;
use ablation_cli::{Failure, FailureKind};

/// Finite-rate ablation chemistry: simulate, enrich, propagate.
///
/// Exit codes: 0 success, 2 solver failure, 3 calibration failure,
/// 4 I/O, schema or usage error. The worker count is read from
/// ABLATION_WORKERS.
#[derive(Debug, Parser)]
#[command(name = "ablation", version)]
struct Cli {
    /// TOML configuration file (defaults apply to anything it omits).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured working directory.
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,
    /// Overrides the configured global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Hifi,
    Lofi,
    Enriched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic scenarios and their manifest.
    Generate {
        /// Generator seed (defaults to the configured one).
        #[arg(long)]
        generator_seed: Option<u64>,
        /// Comma-separated altitudes in km (defaults to the configured split).
        #[arg(long, value_delimiter = ',')]
        altitudes: Option<Vec<f64>>,
        #[arg(long)]
        force: bool,
    },
    /// Solve a surface model at every scenario point.
    Simulate {
        #[arg(long, value_enum)]
        model: Model,
        /// Constant pseudo-reaction rate in 1/s (enriched only).
        #[arg(long)]
        k3p: Option<f64>,
        /// Placeholder adsorption of O and N (enriched only).
        #[arg(long, value_enum, default_value = "on")]
        placeholder: Switch,
        /// Trained model supplying the pseudo-reaction rate (enriched only).
        #[arg(long)]
        model_artifact: Option<PathBuf>,
        /// Check every point against time integration of the kinetics.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        force: bool,
    },
    /// Fit pointwise rates, select features, detrend and train the GP.
    Calibrate {
        #[arg(long)]
        force: bool,
    },
    /// Propagate GP draws to the CO flux ratio of every scenario.
    Propagate {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        model_artifact: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Summarize calibration diagnostics and flux ratios.
    Report,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(w) = cli.workdir {
        cfg.workdir = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.command {
        Command::Generate {
            generator_seed,
            altitudes,
            force,
        } => commands::generate(
            &cfg,
            &GenerateArgs {
                seed: generator_seed,
                altitudes,
                force,
            },
        ),
        Command::Simulate {
            model,
            k3p,
            placeholder,
            model_artifact,
            verify,
            force,
        } => commands::simulate(
            &cfg,
            &SimulateArgs {
                model: match model {
                    Model::Hifi => ModelChoice::Hifi,
                    Model::Lofi => ModelChoice::Lofi,
                    Model::Enriched => ModelChoice::Enriched,
                },
                k3p,
                placeholder: placeholder == Switch::On,
                artifact: model_artifact,
                verify,
                force,
            },
        ),
        Command::Calibrate { force } => commands::calibrate(&cfg, &CalibrateArgs { force }),
        Command::Propagate {
            samples,
            model_artifact,
            force,
        } => commands::propagate(
            &cfg,
            &PropagateArgs {
                samples,
                artifact: model_artifact,
                force,
            },
        ),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(FailureKind::Io.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
