//! Command-line access to the kernels, traces, quadratic forms, figure data
//! and acceptance checks.

mod commands;
mod grid;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use grid::Grid;
use table::Format;

#[derive(Parser, Debug)]
#[command(name = "nbgram", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Target accuracy for series and quadrature.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Zero ordinates, one per line, ascending.
    #[arg(long, global = true)]
    zeros: Option<PathBuf>,

    /// Shift the first Stieltjes constant before anything is computed.
    #[arg(long, global = true, hide = true, allow_hyphen_values = true)]
    perturb_gamma1: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Coeffs {
    Mobius,
    Lambda,
    Nu,
}

impl From<Coeffs> for nbgram::arith::Kind {
    fn from(c: Coeffs) -> Self {
        match c {
            Coeffs::Mobius => Self::Mobius,
            Coeffs::Lambda => Self::Lambda,
            Coeffs::Nu => Self::Nu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived constants next to their published values.
    Constants,
    /// One Gram kernel value, or the whole matrix up to --n-max.
    Kernel {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        q: u8,
        #[arg(long, requires = "v", conflicts_with = "n_max", allow_hyphen_values = true)]
        u: Option<f64>,
        #[arg(long, requires = "u", allow_hyphen_values = true)]
        v: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// S1 and S2 with tail bounds on a grid of x.
    Series {
        #[arg(long, default_value = "0.25:4:0.25")]
        grid: Grid,
    },
    /// L, M traces and their rescalings on a grid of N.
    Traces {
        #[arg(long, value_enum, default_value_t = Coeffs::Mobius)]
        coeffs: Coeffs,
        #[arg(long, default_value = "1e3:1e6:x10")]
        grid: Grid,
    },
    /// Quadratic form, its decomposition and the squared distance.
    Quadform {
        #[arg(long, value_enum, default_value_t = Coeffs::Lambda)]
        coeffs: Coeffs,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        q: u8,
        #[arg(long, conflicts_with = "grid")]
        n_max: Option<usize>,
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Data behind the published figures.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        which: u8,
        /// Defaults to the published range of the figure.
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Run the acceptance checks; exits 1 if any fails.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Restrict to these criteria.
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=13))]
        only: Vec<u8>,
    },
}

/// Why a run stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(nbgram::Error),
    Io(io::Error),
    /// Acceptance checks failed; the report was already written.
    Checks,
}

impl From<nbgram::Error> for Failure {
    fn from(e: nbgram::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        use nbgram::Error as E;
        match self {
            Failure::Checks => 1,
            Failure::Usage(_) => 2,
            Failure::Lib(E::ResourceLimit(_)) => 3,
            Failure::Lib(E::InvalidArgument(_) | E::Domain(_) | E::Format { .. } | E::DataIntegrity(_) | E::Io(_)) => 2,
            Failure::Io(_) => 2,
            Failure::Lib(E::Numerical(_)) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    if let Some(delta) = cli.perturb_gamma1 {
        let c = nbgram::constants::MathConstants::from_gammas(
            nbgram::constants::EULER_GAMMA,
            nbgram::constants::STIELTJES_GAMMA1 + delta,
        );
        nbgram::constants::install(c)?;
    }
    let tol = cli.tol;
    let (table, verdict) = match cli.command {
        Command::Constants => (commands::constants(tol)?, Ok(())),
        Command::Kernel { q, u, v, n_max } => (commands::kernel(q, u.zip(v), n_max, tol)?, Ok(())),
        Command::Series { grid } => (commands::series(&grid, tol)?, Ok(())),
        Command::Traces { coeffs, grid } => (commands::traces(coeffs.into(), &grid)?, Ok(())),
        Command::Quadform { coeffs, q, n_max, grid } => {
            let ns = match (n_max, grid) {
                (_, Some(g)) => g.integers(1).map_err(Failure::Usage)?,
                (n, None) => vec![n.unwrap_or(100)],
            };
            (commands::quadform(coeffs.into(), q, &ns, tol)?, Ok(()))
        }
        Command::Figures { which, grid } => (commands::figure(which, grid, tol)?, Ok(())),
        Command::Verify { suite, only } => {
            let suite = match suite {
                SuiteArg::Fast => nbgram::verify::Suite::Fast,
                SuiteArg::Full => nbgram::verify::Suite::Full,
            };
            let (table, passed) = commands::verify(suite, cli.zeros.clone(), &only);
            (table, if passed { Ok(()) } else { Err(Failure::Checks) })
        }
    };
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(cli.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(cli.format, &mut w)?;
        }
    }
    verdict
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Checks => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
