//! `gpa`: command-line front end producing JSON or CSV run reports.

mod checks;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpa_core::report::{Format, RunReport};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "gpa", version, about = "Loop algebras, traces and their oracles on finite bipartite graphs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Graph JSON file or built-in name (a2, a3, s4, starN, pathN).
    #[arg(long, global = true)]
    pub graph: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Absolute tolerance for identity checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads for Monte Carlo, Gram and Fock computations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graph inspection.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Center-valued traces of a loop or element, or Gram positivity.
    Trace(commands::TraceArgs),
    /// Free Poisson moments from four independent computations.
    Moments(commands::MomentsArgs),
    /// Evaluate a tangle program or compare two.
    Tangle(commands::TangleArgs),
    /// Tower relations: generators, projections, expectation, Markov property.
    Tower(commands::TowerArgs),
    /// Fock-space oracle checks.
    Fock(commands::FockArgs),
    /// Monte Carlo trace estimates from Gaussian block matrices.
    Mc(commands::McArgs),
    /// The invariant suite on the built-in graphs.
    Selftest(commands::SelftestArgs),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Perron-Frobenius data and edge weights.
    Info {
        /// Graph JSON file or built-in name; overrides --graph.
        file: Option<String>,
    },
}

pub enum CliError {
    Usage(String),
    Core(gpa_core::Error),
}

impl From<gpa_core::Error> for CliError {
    fn from(e: gpa_core::Error) -> CliError {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<RunReport> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        gpa_core::par::set_threads(n);
    }
    if c.tol.is_nan() || c.tol <= 0.0 {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    match cli.cmd {
        Cmd::Graph(GraphCmd::Info { file }) => commands::graph_info(c, file),
        Cmd::Trace(a) => commands::trace(c, a),
        Cmd::Moments(a) => commands::moments(c, a),
        Cmd::Tangle(a) => commands::tangle(c, a),
        Cmd::Tower(a) => commands::tower(c, a),
        Cmd::Fock(a) => commands::fock(c, a),
        Cmd::Mc(a) => commands::mc(c, a),
        Cmd::Selftest(a) => commands::selftest(c, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.common.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let out = cli.common.out.clone();
    let start = Instant::now();
    let mut report = match run(cli) {
        Ok(r) => r,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    let bytes = report.emit(format);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &bytes) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&bytes).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("check failed: {}", report.command);
        ExitCode::from(1)
    }
}
