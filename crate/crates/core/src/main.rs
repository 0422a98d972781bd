use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bohb::cli::{self, Grid, RunConfig};
use bohb::sampler::SamplerParams;
use bohb::scheduler::{Axis, ClockMode, OptimizerKind};
use bohb::Error;

#[derive(Parser)]
#[command(
    name = "bohb",
    version,
    about = "Multi-fidelity hyperparameter optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a batch of seeds and write one trajectory file per seed.
    Run(RunArgs),
    /// Print the Hyperband bracket table.
    Schedule {
        #[arg(long)]
        min_budget: f64,
        #[arg(long)]
        max_budget: f64,
        #[arg(long, default_value_t = 3.0)]
        eta: f64,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Aggregate run directories into a mean-regret CSV table.
    Report {
        /// Directories written by `bohb run`.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// `linear:START:STOP:N`, `log:START:STOP:N` or `v1,v2,...`.
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = AxisArg::Budget)]
        axis: AxisArg,
        /// Write the table here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Budget,
    Time,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Simulated,
    Realtime,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file; its keys override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "bohb")]
    optimizer: String,
    #[arg(long, default_value = "counting-ones")]
    benchmark: String,
    #[arg(long, default_value_t = 4)]
    n_categorical: usize,
    #[arg(long, default_value_t = 4)]
    n_continuous: usize,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long)]
    space_file: Option<PathBuf>,
    #[arg(long)]
    min_budget: Option<f64>,
    #[arg(long)]
    max_budget: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    eta: f64,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    top_q: Option<f64>,
    #[arg(long)]
    num_samples: Option<usize>,
    #[arg(long)]
    min_points: Option<usize>,
    #[arg(long)]
    bandwidth_factor: Option<f64>,
    #[arg(long)]
    min_bandwidth: Option<f64>,
    #[arg(long, default_value_t = 1)]
    n_workers: usize,
    #[arg(long, value_enum, default_value_t = ClockArg::Simulated)]
    clock: ClockArg,
    /// Realtime seconds slept per unit of evaluation cost.
    #[arg(long, default_value_t = 0.0)]
    time_scale: f64,
    #[arg(long, default_value_t = 10)]
    n_iterations: usize,
    #[arg(long)]
    max_total_budget: Option<f64>,
    /// Seeds as a list (`0,1,5`) or a half-open range (`0..32`).
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long, env = "BOHB_OUTPUT_DIR", default_value = "runs")]
    output_dir: PathBuf,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::InvalidParam {
        field: "seeds".into(),
        reason: format!("expected a list like `0,1,2` or a range like `0..32`, got `{s}`"),
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let defaults = SamplerParams::default();
        let mut config = RunConfig {
            optimizer: self.optimizer.parse::<OptimizerKind>()?,
            benchmark: self.benchmark,
            n_categorical: self.n_categorical,
            n_continuous: self.n_continuous,
            dim: self.dim,
            space_file: self.space_file,
            min_budget: self.min_budget,
            max_budget: self.max_budget,
            eta: self.eta,
            sampler: SamplerParams {
                rho: self.rho.unwrap_or(defaults.rho),
                top_q: self.top_q.unwrap_or(defaults.top_q),
                num_samples: self.num_samples.unwrap_or(defaults.num_samples),
                min_points: self.min_points,
                bandwidth_factor: self.bandwidth_factor.unwrap_or(defaults.bandwidth_factor),
                min_bandwidth: self.min_bandwidth.unwrap_or(defaults.min_bandwidth),
                eps_density: defaults.eps_density,
            },
            n_workers: self.n_workers,
            clock: match self.clock {
                ClockArg::Simulated => ClockMode::Simulated,
                ClockArg::Realtime => ClockMode::Realtime,
            },
            time_scale: self.time_scale,
            n_iterations: self.n_iterations,
            max_total_budget: self.max_total_budget,
            seeds: parse_seeds(&self.seeds)?,
            output_dir: self.output_dir,
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            config = config.with_overrides(&text)?;
        }
        Ok(config)
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let summary = cli::cmd_run(&config)?;
            eprintln!(
                "wrote {} trajectory files to {} ({} already present)",
                summary.written.len(),
                config.output_dir.display(),
                summary.skipped.len()
            );
        }
        Command::Schedule {
            min_budget,
            max_budget,
            eta,
            json,
        } => {
            let brackets = cli::cmd_schedule(min_budget, max_budget, eta)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&brackets).expect("brackets serialize")
                );
            } else {
                print!("{}", cli::format_schedule(&brackets));
            }
        }
        Command::Report {
            dirs,
            grid,
            axis,
            output,
        } => {
            let grid: Grid = grid.parse()?;
            let axis = match axis {
                AxisArg::Budget => Axis::Budget,
                AxisArg::Time => Axis::Time,
            };
            let csv = cli::cmd_report(&dirs, &grid, axis)?.to_csv();
            match output {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
