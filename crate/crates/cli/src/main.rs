#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Per-spike energy of conductance-based neuron models.
#[derive(Parser, Debug)]
#[command(name = "neuroenergy", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the registered cells and their parameters
    Cells(RunConfig),
    /// Integrate one cell and write its trace as CSV
    Simulate(RunConfig),
    /// Per-spike charge and energy report, one row per cell
    Report(RunConfig),
    /// Temperature × stimulus grid of per-spike observables
    Sweep(RunConfig),
    /// Run the acceptance checks against the reference values
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Cell ids separated by commas, or "all"
    #[arg(long, default_value = "all")]
    pub cell: String,
    /// Stimulus in µA/cm²: a value, or START:STOP[:STEP] for sweeps
    #[arg(long)]
    pub stim: Option<String>,
    /// Temperature in °C: a value, or START:STOP[:STEP] for sweeps
    #[arg(long)]
    pub temp: Option<String>,
    /// Simulated time, ms
    #[arg(long)]
    pub duration: Option<f64>,
    /// Integration step, ms
    #[arg(long)]
    pub dt: Option<f64>,
    /// Leading time excluded from analysis, ms
    #[arg(long)]
    pub transient: Option<f64>,
    /// Free energy of ATP hydrolysis, kJ/mol
    #[arg(long, default_value_t = neuroenergy::energetics::DEFAULT_F_ATP)]
    pub fatp: f64,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Subtract the resting currents from the per-spike loads
    #[arg(long)]
    pub subtract_rest: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Only the reference checks on cells 1, 5 and 9
    #[arg(long)]
    pub quick: bool,
    /// Scale every cell's g_Na by this factor (sensitivity test)
    #[arg(long, hide = true)]
    pub perturb_gna: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const VALIDATION: u8 = 1;
    pub const NUMERICAL: u8 = 2;
    pub const ACCEPTANCE: u8 = 3;

    pub fn validation(message: impl Into<String>) -> Failure {
        Failure {
            code: Failure::VALIDATION,
            message: message.into(),
        }
    }
}

impl From<neuroenergy::Error> for Failure {
    fn from(e: neuroenergy::Error) -> Failure {
        use neuroenergy::Error::*;
        let code = match e {
            IntegrationFailure { .. } | NoSpikes | ZeroDenominator(_) => Failure::NUMERICAL,
            _ => Failure::VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::validation(format!("i/o error: {e}"))
    }
}

pub fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn set_jobs(jobs: usize) -> Result<(), Failure> {
    #[cfg(feature = "parallel")]
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::validation(format!("--jobs: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cells(cfg) => commands::cells(&cfg),
        Command::Simulate(cfg) => commands::simulate(&cfg),
        Command::Report(cfg) => commands::report(&cfg),
        Command::Sweep(cfg) => {
            set_jobs(cfg.jobs)?;
            commands::sweep(&cfg)
        }
        Command::Verify(args) => {
            set_jobs(args.jobs)?;
            commands::verify(&args)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Failure::VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
