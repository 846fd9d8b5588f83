//! `phaselock`: critical coupling, fixed points and traces for the finite
//! Kuramoto model.
//!
//! Exit codes: 0 success, 1 negative finding (no fixed point, no admissible
//! β), 2 input or parameter error, 3 enumeration capacity exceeded.

mod commands;
mod input;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::input::InputArgs;
use crate::render::Format;

/// Thread count for `--k-grid` sweeps; defaults to rayon's choice.
const THREADS_ENV: &str = "PHASELOCK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "phaselock", version, about = "Phase-locking analysis for the finite Kuramoto model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower bounds ‖Ω‖∞, 2σ and the closed-form upper bound on k_c
    Bounds {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact critical coupling by bisection
    Kc {
        #[command(flatten)]
        input: InputArgs,
        /// Absolute bisection tolerance [default: 1e-10·‖Ω‖∞]
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Whether a phase-locked state exists at coupling k
    Existence {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, required_unless_present = "k_grid", conflicts_with = "k_grid")]
        k: Option<f64>,
        /// Sweep: `a,b,c` or `lo:hi:count`
        #[arg(long, value_name = "GRID")]
        k_grid: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Certified fixed points for every sign vector
    FixedPoints {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = phaselock::coupling::DEFAULT_MAX_N)]
        max_n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// RK4 trace of L = R² (and D(t) for identical oscillators)
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        /// Identical oscillators (Ω = 0); needs --n
        #[arg(long, requires = "n")]
        homogeneous: bool,
        #[arg(long, requires = "homogeneous")]
        n: Option<usize>,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Step size [default: min(0.01, 0.1/max(1, k))]
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Seed for the uniform random initial phases
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial phases, comma separated (overrides --seed)
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        init: Option<String>,
        /// Report the first recorded time with L >= threshold
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Self-consistency curve P(kβ) against the line h = β
    Scan {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Why a command did not produce a success exit.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<phaselock::Error> for Failure {
    fn from(e: phaselock::Error) -> Self {
        use phaselock::Error;
        let code = match e {
            Error::Capacity { .. } => 3,
            Error::EmptyRange { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Rendered result plus exit status (0, or 1 for a negative finding).
pub struct Report {
    pub body: String,
    pub negative: bool,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::input(format!("{}={:?} is not a positive integer", THREADS_ENV, raw)))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input(format!("cannot configure thread pool: {}", e)))
}

fn run(cli: Cli) -> Result<Report, Failure> {
    configure_threads()?;
    let (report, out) = match cli.command {
        Command::Bounds { input, out } => (commands::bounds(&input.resolve()?, out.format), out),
        Command::Kc { input, eps, out } => (commands::kc(&input.resolve()?, eps, out.format)?, out),
        Command::Existence { input, k, k_grid, out } => {
            let grid = match (k, k_grid) {
                (_, Some(g)) => input::parse_k_grid(&g)?,
                (Some(k), None) => vec![k],
                (None, None) => unreachable!("clap enforces --k or --k-grid"),
            };
            (commands::existence(&input.resolve()?, &grid, out.format)?, out)
        }
        Command::FixedPoints { input, k, max_n, out } => {
            (commands::fixed_points(&input.resolve()?, k, max_n, out.format)?, out)
        }
        Command::Simulate {
            input,
            homogeneous,
            n,
            k,
            t_end,
            dt,
            record_every,
            seed,
            init,
            threshold,
            out,
        } => {
            let source = if homogeneous {
                if !input.is_empty() {
                    return Err(Failure::input("--homogeneous cannot be combined with a frequency input"));
                }
                commands::SimSource::Homogeneous(n.expect("clap enforces --n"))
            } else {
                commands::SimSource::Spec(input.resolve()?)
            };
            let init = init.as_deref().map(input::parse_phases).transpose()?;
            let params = commands::SimParams { k, t_end, dt, record_every, seed, init, threshold };
            (commands::simulate(source, &params, out.format)?, out)
        }
        Command::Scan { input, k, samples, out } => {
            (commands::scan(&input.resolve()?, k, samples, out.format)?, out)
        }
    };
    match &out.output {
        Some(path) => std::fs::write(path, &report.body)
            .map_err(|e| Failure::input(format!("cannot write {}: {}", path.display(), e)))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(report.body.as_bytes());
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) if report.negative => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("phaselock: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
