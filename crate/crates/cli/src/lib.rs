//! Command-line front end for `gauss-means`.
//!
//! Every command writes a CSV table (header row, 17 significant digits) to
//! standard output and diagnostics to standard error. Exit codes: 0 on
//! success, 2 on usage errors, 3 on numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gauss_means::{MeanError, MeanSpec, Region};
use thiserror::Error;

mod commands;
pub mod dsl;
pub mod table;

pub use commands::SweepConfig;
pub use dsl::{parse_mean, MeanExpr, ParseError, ParseErrorKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Mean(#[from] MeanError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn numerical(e: &MeanError) -> bool {
    match e {
        MeanError::NonConvergent { .. }
        | MeanError::Undecided { .. }
        | MeanError::NotBracketed { .. }
        | MeanError::RootNotConverged { .. }
        | MeanError::AssumptionViolated { .. } => true,
        MeanError::AtPoint { source, .. } => numerical(source),
        _ => false,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Mean(e) if numerical(e) => EXIT_NUMERICAL,
            CliError::Mean(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

const MEAN_HELP: &str = "Mean expression, e.g. `arithmetic`, `power(2)`, `weighted_arithmetic(0.25)`; \
or `table:PATH` for a CSV with header `x,y,value` and one row per node of a full rectangular grid";

#[derive(Debug, Parser)]
#[command(name = "gauss-means", version, about = "Gauss iteration of mean-type mappings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterates (M, N) n times: columns n,Mn,Nn,gap
    Iterate {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Number of iterations
        #[arg(short = 'n', default_value_t = 10)]
        count: usize,
    },
    /// Gauss limit at a point: columns status,value,final_gap,iterations (exit 3 unless converged)
    Limit {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Diagonal-basin membership: columns x,y,verdict,iterations,gap,period
    Basin {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Contractivity at a point or over a sample: columns
    /// x,y,diag_contractive,weak_index,weak_certificate,second_iterate_contractive,c_index
    Contract {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        point: OptionalPointArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Internality, symmetry and one-sided strictness of -M (and -N, with the
    /// sufficient conditions for the pair): columns
    /// mean,property,verdict,checked,witness_x,witness_y,witness_value
    Classify {
        #[arg(short = 'M', help = MEAN_HELP)]
        m: String,
        #[arg(short = 'N', help = MEAN_HELP)]
        n: Option<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, value_parser = parse_region)]
        region: Option<Region>,
        #[arg(long, default_value_t = gauss_means::DEFAULT_WEAK_BUDGET)]
        nmax: usize,
    },
    /// Invariance residual of -K under (M, N): columns max_residual,x,y,points.
    /// `-K gauss` uses the computed Gauss limit of (M, N)
    Residual {
        #[arg(short = 'K', help = MEAN_HELP)]
        k: String,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Value of the mean complementary to -M with respect to -K: columns x,y,t,residual
    Complement {
        #[arg(short = 'K', help = MEAN_HELP)]
        k: String,
        #[arg(short = 'M', help = MEAN_HELP)]
        m: String,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = gauss_means::DEFAULT_TOL)]
        tol: f64,
    },
    /// Tail estimates of the extremal invariant means: columns l_est,u_est,spread,tail
    Extremal {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        extremal: ExtremalArgs,
    },
    /// Runs one analysis over a grid; rows in row-major order, columns x,y then
    /// the analysis columns
    Sweep {
        #[arg(long, value_enum)]
        analysis: Analysis,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = parse_region)]
        region: Region,
        #[arg(long, value_parser = parse_res, default_value = "20x20")]
        res: (usize, usize),
        #[command(flatten)]
        limit: LimitArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        extremal: ExtremalArgs,
        /// Iterations per point for the envelope analysis
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Limit,
    Basin,
    Contract,
    Envelope,
    Extremal,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(short = 'M', help = MEAN_HELP)]
    pub m: String,
    #[arg(short = 'N', help = MEAN_HELP)]
    pub n: String,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(short = 'x', allow_negative_numbers = true)]
    pub x: f64,
    #[arg(short = 'y', allow_negative_numbers = true)]
    pub y: f64,
}

#[derive(Debug, Args)]
pub struct OptionalPointArgs {
    #[arg(short = 'x', allow_negative_numbers = true, requires = "y")]
    pub x: Option<f64>,
    #[arg(short = 'y', allow_negative_numbers = true, requires = "x")]
    pub y: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long, default_value_t = gauss_means::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = gauss_means::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    /// Budget for the weak-contractivity index
    #[arg(long, default_value_t = gauss_means::DEFAULT_WEAK_BUDGET)]
    pub nmax: usize,
    /// Constant for the c-contraction index
    #[arg(long = "c")]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    /// Iterations of the shuffled sequence
    #[arg(long = "extremal-steps", default_value_t = gauss_means::DEFAULT_EXTREMAL_STEPS)]
    pub n_max: usize,
    #[arg(long, default_value_t = gauss_means::DEFAULT_TAIL)]
    pub tail: usize,
}

/// Points to sample: `--seed` draws `--samples` random points, `--res` a lattice.
#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_parser = parse_region)]
    pub region: Option<Region>,
    #[arg(long, value_parser = parse_res)]
    pub res: Option<(usize, usize)>,
}

fn parse_region(s: &str) -> Result<Region, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x0,x1,y0,y1: {e}"))?;
    match v[..] {
        [x0, x1, y0, y1] if x0 <= x1 && y0 <= y1 && v.iter().all(|a| a.is_finite()) => {
            Ok(Region::new(x0, x1, y0, y1))
        }
        _ => Err("expected four finite numbers x0,x1,y0,y1 with x0 <= x1 and y0 <= y1".into()),
    }
}

fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NxM")?;
    let nx = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let ny = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok((nx, ny))
}

/// Resolves a `-M`/`-N`/`-K` argument: a mean expression or `table:PATH`.
pub fn resolve_mean(text: &str) -> Result<MeanSpec, CliError> {
    if let Some(path) = text.strip_prefix(table::TABLE_PREFIX) {
        return table::load_table(&PathBuf::from(path));
    }
    parse_mean(text)
        .map(|e| e.spec)
        .map_err(|e| CliError::Usage(format!("{text:?}: {e}")))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match commands::execute(cli.command, out) {
        Ok(outcome) => {
            for line in outcome.diagnostics {
                let _ = writeln!(err, "{line}");
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
