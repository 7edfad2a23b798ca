use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod output;

use error::CliError;

/// Rényi-DP to (ε, δ)-DP conversion and Gaussian composition accounting.
#[derive(Debug, Parser)]
#[command(name = "rdp-acct", version, args_override_self = true)]
struct Cli {
    /// Read `key=value` flags from a file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Add wall-clock time to the output metadata.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between RDP and DP parameters; supply exactly two of --gamma, --eps, --delta.
    Convert(ConvertArgs),
    /// ε after T compositions of a (subsampled) Gaussian mechanism.
    Compose(ComposeArgs),
    /// Largest number of compositions within an (ε, δ) budget.
    MaxT(MaxTArgs),
    /// Noise variance needed for T compositions to be (ε, δ)-DP.
    Variance(VarianceArgs),
    /// Emit a table of privacy parameters over a sweep.
    Curve(CurveArgs),
    /// Cross-check the exact conversion against brute-force search.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Bound,
    Baseline,
    Balle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ClosedForm,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Tolerance {
    /// Absolute tolerance of scalar searches.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct Mechanism {
    /// Noise standard deviation.
    #[arg(long)]
    sigma: f64,
    /// Poisson subsampling rate (noisy SGD, unit sensitivity).
    #[arg(long, conflicts_with = "sensitivity")]
    q: Option<f64>,
    /// L2 sensitivity of the plain Gaussian mechanism.
    #[arg(long)]
    sensitivity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    mech: Mechanism,
    /// Number of compositions.
    #[arg(long = "T", value_name = "T", value_parser = clap::value_parser!(u64).range(1..))]
    t: u64,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "closed-form")]
    mode: ModeArg,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct MaxTArgs {
    #[command(flatten)]
    mech: Mechanism,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "closed-form")]
    mode: ModeArg,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[arg(long = "T", value_name = "T", value_parser = clap::value_parser!(u64).range(1..))]
    t: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Preset: 1 sweeps δ for given (α, ε) pairs; 2 is σ=20, δ=1e-5,
    /// T=1..1000; 3 is noisy SGD with σ=4, q=0.001, δ=1e-5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    fig: Option<u8>,
    #[arg(long, conflicts_with = "fig")]
    sigma: Option<f64>,
    #[arg(long, conflicts_with_all = ["fig", "sensitivity"])]
    q: Option<f64>,
    #[arg(long, conflicts_with = "fig")]
    sensitivity: Option<f64>,
    #[arg(long, conflicts_with = "fig")]
    delta: Option<f64>,
    #[arg(long)]
    t_from: Option<u64>,
    #[arg(long)]
    t_to: Option<u64>,
    #[arg(long)]
    t_step: Option<u64>,
    /// Orders for the δ sweep (repeatable, paired with --eps).
    #[arg(long)]
    alpha: Vec<f64>,
    /// DP ε for the δ sweep (repeatable, paired with --alpha).
    #[arg(long)]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    delta_from: f64,
    #[arg(long, default_value_t = 0.5)]
    delta_to: f64,
    #[arg(long, default_value_t = 60)]
    delta_points: usize,
    #[arg(long, value_enum, default_value = "closed-form")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// Coarse grid intervals per axis.
    #[arg(long, default_value_t = 4096)]
    grid_n: usize,
    /// Refinement intervals per refined row.
    #[arg(long, default_value_t = 4096)]
    refine_n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = rdp_accountant::oracle::DEFAULT_SEED)]
    seed: u64,
    /// Allowed |exact - brute force| and q* gap.
    #[arg(long, default_value_t = 1e-4)]
    gap_tol: f64,
}

fn run(args: Vec<std::ffi::OsString>) -> Result<(), CliError> {
    let args = config::expand_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code == 0 {
                return Ok(());
            }
            return Err(CliError::Usage(String::new()));
        }
    };
    let start = Instant::now();
    let timing = cli.timing.then_some(start);
    match cli.command {
        Command::Convert(a) => commands::convert(&a, timing),
        Command::Compose(a) => commands::compose(&a, timing),
        Command::MaxT(a) => commands::max_t(&a, timing),
        Command::Variance(a) => commands::variance(&a, timing),
        Command::Curve(a) => commands::curve(&a, timing),
        Command::OracleCheck(a) => commands::oracle_check(&a, timing),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(&e, CliError::Usage(m) if m.is_empty()) {
                eprintln!("rdp-acct: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
