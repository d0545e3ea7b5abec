use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gdro::config::{EnvironmentSpec, ExperimentConfig, LowerBoundSpec};
use gdro::metrics::solve_opt_csv;
use gdro::{emit_plots, run_experiment, Environment, HarnessError};
use gdro_core::{SolverConfig, SolverKind};

#[derive(Parser)]
#[command(name = "gdro", version, about = "Group DRO solvers with sleeping-bandit max players")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver and seed of an experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Search for the margin lambda the adaptive solver would use.
    Solveopt {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 0.005)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = gdro_core::constants::DEFAULT_VALIDATION_SCALE)]
        validation_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trace (lambda,g,f,U,L) here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute the ideal-player optimum L_star.
    Idealgame {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        rounds: Option<u64>,
        /// Cache file to reuse or write.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Render the plots for a directory written by `run`.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Lowerbound,
    Csv,
}

#[derive(clap::Args)]
struct EnvArgs {
    /// Environment; `csv` takes its dataset from --config.
    #[arg(long, value_enum)]
    env: Option<EnvKind>,
    /// Experiment file whose [environment] section to use.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    groups: usize,
    #[arg(long, default_value_t = 2)]
    beta: usize,
    #[arg(long, default_value_t = 0.2)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_gap: f64,
}

impl EnvArgs {
    fn spec(&self) -> Result<EnvironmentSpec, HarnessError> {
        let lower_bound = || {
            EnvironmentSpec::Lowerbound(LowerBoundSpec {
                groups: self.groups,
                beta: self.beta,
                lambda: self.lambda,
                delta_gap: self.delta_gap,
            })
        };
        match (self.env, &self.config) {
            (Some(EnvKind::Lowerbound), _) | (None, None) => Ok(lower_bound()),
            (_, Some(path)) => {
                let spec = ExperimentConfig::from_file(path)?.environment;
                match (self.env, &spec) {
                    (Some(EnvKind::Csv), EnvironmentSpec::Lowerbound(_)) => Err(HarnessError::Config(format!(
                        "{} describes the lower-bound environment, not a CSV dataset",
                        path.display()
                    ))),
                    _ => Ok(spec),
                }
            }
            (Some(EnvKind::Csv), None) => Err(HarnessError::Config("--env csv needs --config <file>".into())),
        }
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = run_experiment(&cfg)?;
            println!("l_star={}", report.ideal.l_star);
            for run in &report.runs {
                let r = &run.result;
                eprintln!(
                    "{} seed={} rounds={} samples={} final_gap={} ({:.2}s)",
                    run.label,
                    run.seed,
                    r.rounds,
                    r.total_samples,
                    r.final_gap.map(|g| g.to_string()).unwrap_or_default(),
                    run.seconds
                );
            }
            println!("wrote {} files to {}", report.files.len(), cfg.experiment.output_dir.display());
        }
        Command::Solveopt { env, epsilon, delta, validation_scale, seed, trace } => {
            let env = Environment::build(&env.spec()?)?;
            let mut config = SolverConfig::new(SolverKind::Adaptive, env.diameter(), env.lipschitz());
            config.epsilon = epsilon;
            config.delta = delta;
            config.validation_scale = validation_scale;
            config.seed = seed;
            let result = env.select_margin(&config)?;
            let csv = solve_opt_csv(&result);
            match trace {
                Some(path) => std::fs::write(&path, csv).map_err(|e| HarnessError::Io { path, source: e })?,
                None => print!("{csv}"),
            }
            println!("lambda_hat={}", result.lambda_hat);
        }
        Command::Idealgame { env, rounds, cache } => {
            let env = Environment::build(&env.spec()?)?;
            let rounds = rounds.unwrap_or_else(|| env.default_ideal_rounds());
            let ideal = match cache {
                Some(path) => env.ideal_cached(rounds, &path)?,
                None => env.ideal(rounds)?,
            };
            let theta: Vec<String> = ideal.theta.iter().map(f64::to_string).collect();
            println!("theta={}", theta.join(" "));
            println!("l_star={}", ideal.l_star);
        }
        Command::Plot { input, out } => {
            for path in emit_plots(&input, out.as_deref().unwrap_or(&input))? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
