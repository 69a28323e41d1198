//! Batch front end for `osyclass`: parses JSON inputs, runs one computation
//! and prints a JSON report.
//!
//! Exit codes: 0 computed, 2 invalid input, 3 unknown verdict, 4 capacity
//! exceeded. Errors are reported as `{"error": {"kind", "message"}}`.

mod commands;
mod input;
mod output;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use output::render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

/// Exit code and standard output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub(crate) fn input(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
            code: EXIT_INVALID,
        }
    }
}

impl From<osyclass::Error> for CliError {
    fn from(e: osyclass::Error) -> Self {
        let code = match e {
            osyclass::Error::Capacity { .. } => EXIT_CAPACITY,
            _ => EXIT_INVALID,
        };
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "osyclass",
    version,
    about = "Invariants and isomorphism decisions for operator systems and finite structures"
)]
struct Cli {
    /// Worker threads for restarts and bijection searches.
    #[arg(long, short = 'j', global = true, default_value_t = 1)]
    jobs: usize,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum of a unitary as sorted angles.
    Spectrum {
        unitary: PathBuf,
        #[arg(long, default_value_t = osyclass::unitary::DEDUP_TOL)]
        tol: f64,
    },
    /// Rigid-motion canonical form of a unitary's spectrum.
    Canon {
        unitary: PathBuf,
        #[arg(long, default_value_t = osyclass::unitary::DEDUP_TOL)]
        tol: f64,
    },
    /// Complete order isomorphism of the systems generated by two unitaries.
    UnitaryCois {
        u: PathBuf,
        v: PathBuf,
        /// Decide by bijection enumeration.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = osyclass::unitary::DEDUP_TOL)]
        tol: f64,
        #[arg(long, default_value_t = osyclass::unitary::DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Degree-1 homeomorphism of two finite point sets.
    Deg1 {
        d: PathBuf,
        e: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, default_value_t = osyclass::degree1::DEFAULT_TOL)]
        tol: f64,
        /// Test spans through the normal operator system instead of monomials.
        #[arg(long)]
        via_opsys: bool,
    },
    /// Norm of a matrix-level element.
    Norm {
        /// An operator system, or a dual ball `{"dim", "functionals"}` for the
        /// minimal quantization.
        system: PathBuf,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = osyclass::TOL_NUM)]
        tol: f64,
    },
    /// Best-found level distances and their weighted sum.
    Osdist {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parametrized families.
    Family {
        family: FamilyName,
        #[arg(long)]
        variant: Variant,
        #[arg(long = "t")]
        t: f64,
        #[arg(long = "s")]
        s: f64,
        #[arg(long, default_value_t = 128)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = osyclass::TOL_NUM)]
        tol: f64,
    },
    /// Weighted distance between finite metric structures.
    GhDist {
        m: PathBuf,
        n: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmax: usize,
        #[arg(long, default_value_t = osyclass::metricgh::DEFAULT_CAP)]
        cap: usize,
    },
    /// Values of the universal sentences up to a quantifier depth.
    GhTheory {
        m: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Re-checks the certificates and values of a saved report.
    Verify { report: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    Wt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    #[value(name = "3x3")]
    ThreeByThree,
    #[value(name = "2x2")]
    TwoByTwo,
}

fn error_report(e: &CliError) -> String {
    render(&json!({"error": {"kind": e.kind, "message": e.message}}))
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                };
            }
            let err = CliError::input("usage", e.to_string().trim_end().to_string());
            return Outcome {
                code: EXIT_INVALID,
                stdout: error_report(&err),
            };
        }
    };
    let start = Instant::now();
    let jobs = cli.jobs.max(1);
    let result = dispatch(cli.command, jobs);
    match result {
        Ok((mut report, code)) => {
            if cli.timing {
                if let Value::Object(map) = &mut report {
                    map.insert(
                        "wall_time_seconds".into(),
                        json!(start.elapsed().as_secs_f64()),
                    );
                }
            }
            Outcome {
                code,
                stdout: render(&report),
            }
        }
        Err(e) => Outcome {
            code: e.code,
            stdout: error_report(&e),
        },
    }
}

fn dispatch(command: Command, jobs: usize) -> Result<(Value, i32), CliError> {
    use commands as c;
    match command {
        Command::Spectrum { unitary, tol } => c::spectrum(&input::read_json(&unitary)?, tol),
        Command::Canon { unitary, tol } => c::canon(&input::read_json(&unitary)?, tol),
        Command::UnitaryCois {
            u,
            v,
            oracle,
            tol,
            cap,
        } => c::unitary_cois(
            &input::read_json(&u)?,
            &input::read_json(&v)?,
            c::CoisArgs { oracle, tol, cap },
            jobs,
        ),
        Command::Deg1 {
            d,
            e,
            cap,
            tol,
            via_opsys,
        } => c::deg1(
            &input::read_json(&d)?,
            &input::read_json(&e)?,
            c::Deg1Args {
                cap,
                tol,
                via_opsys,
            },
            jobs,
        ),
        Command::Norm {
            system,
            element,
            level,
            tol,
        } => c::norm(
            &input::read_json(&system)?,
            &input::read_json(&element)?,
            level,
            tol,
        ),
        Command::Osdist {
            x,
            y,
            levels,
            restarts,
            seed,
        } => c::osdist(
            &input::read_json(&x)?,
            &input::read_json(&y)?,
            c::OsdistArgs {
                levels,
                restarts,
                seed,
            },
            jobs,
        ),
        Command::Family {
            family: FamilyName::Wt,
            variant,
            t,
            s,
            restarts,
            seed,
            tol,
        } => {
            let variant = match variant {
                Variant::ThreeByThree => osyclass::osdist::WtVariant::ThreeByThree,
                Variant::TwoByTwo => osyclass::osdist::WtVariant::TwoByTwo,
            };
            c::family_wt(
                c::WtArgs {
                    variant,
                    t,
                    s,
                    restarts,
                    seed,
                    tol,
                },
                jobs,
            )
        }
        Command::GhDist { m, n, kmax, cap } => {
            c::gh_dist(&input::read_json(&m)?, &input::read_json(&n)?, kmax, cap)
        }
        Command::GhTheory { m, depth } => c::gh_theory(&input::read_json(&m)?, depth),
        Command::Verify { report } => verify::verify(&input::read_json(&report)?, jobs),
    }
}
