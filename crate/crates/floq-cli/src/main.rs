//! `floq`: analyze, solve and verify planar linear systems with commuting
//! coefficient structure, driven by TOML problem files.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 model rejection (the
//! system is not in the commuting class, or a12 degenerates), 3 numerical
//! failure.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use floq::numerics::NumericsError;
use floq::reduction::ReductionError;
use floq::sysmodel::SystemError;

use problem::Problem;

#[derive(Parser)]
#[command(
    name = "floq",
    version,
    about = "Closed-form solutions and Floquet analysis for planar linear ODE systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Relative tolerance for integration-backed checks (overrides the
    /// problem file's `[tolerances]` section).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output format: `csv` for trajectory tables (the default for solve),
    /// `json` for machine-readable reports.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fit or validate the commuting structure and classify the system
    Analyze { file: PathBuf },
    /// Solve the initial value problem; emits CSV samples on stdout
    Solve {
        file: PathBuf,
        /// Also integrate numerically and append oracle and |delta| columns
        #[arg(long)]
        verify: bool,
    },
    /// Floquet exponents, multipliers, trace residuals and stability
    Floquet { file: PathBuf },
    /// Reduce to a scalar second-order equation
    Reduce {
        file: PathBuf,
        /// Round-trip the reduction against the integrator
        #[arg(long)]
        check: bool,
    },
    /// Run the full residual suite against the problem file
    Verify { file: PathBuf },
}

/// Error classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unparsable problem file (exit 1).
    Usage(String),
    /// The model is outside the commuting class (exit 2).
    Rejected(String),
    /// A numerical procedure failed or a verification gate tripped (exit 3).
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Rejected(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Rejected(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::NotCommutingClass { .. } | SystemError::DegenerateA12 => {
                CliError::Rejected(e.to_string())
            }
            SystemError::AntiderivativeMismatch { .. }
            | SystemError::DerivativeMismatch { .. }
            | SystemError::PeriodViolated { .. } => CliError::Usage(e.to_string()),
            SystemError::NonFiniteCoefficient { .. } | SystemError::Numerics(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<floq::floquet::FloquetError> for CliError {
    fn from(e: floq::floquet::FloquetError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::ZeroCrossing { .. } => CliError::Rejected(e.to_string()),
            ReductionError::Numerics(n) => CliError::Numerical(n.to_string()),
            ReductionError::System(s) => CliError::from(s),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.format == Some(Format::Json);
    match cli.command {
        Command::Analyze { file } => {
            let problem = Problem::load(&file, cli.tol)?;
            let r = commands::analyze(&problem)?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::analyze_text(&r));
            }
            Ok(())
        }
        Command::Solve { file, verify } => {
            let problem = Problem::load(&file, cli.tol)?;
            let r = commands::solve(&problem, verify)?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::solve_csv(&r));
            }
            Ok(())
        }
        Command::Floquet { file } => {
            let problem = Problem::load(&file, cli.tol)?;
            let r = commands::floquet(&problem)?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::floquet_text(&r));
            }
            Ok(())
        }
        Command::Reduce { file, check } => {
            let problem = Problem::load(&file, cli.tol)?;
            let r = commands::reduce(&problem, check)?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::reduce_text(&r));
            }
            if let Some(rt) = &r.round_trip {
                if !rt.passed {
                    return Err(CliError::Numerical(format!(
                        "round-trip check failed: deviation {:.3e} exceeds {:.1e}",
                        rt.max_deviation, rt.tolerance
                    )));
                }
            }
            Ok(())
        }
        Command::Verify { file } => {
            let problem = Problem::load(&file, cli.tol)?;
            let r = commands::verify(&problem)?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::verify_text(&r));
            }
            if !r.all_passed {
                return Err(CliError::Numerical(
                    "one or more verification checks failed".to_string(),
                ));
            }
            Ok(())
        }
    }
}
