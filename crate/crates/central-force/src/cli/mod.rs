//! Command-line front end.
//!
//! Every subcommand prints a JSON document (or writes it to `--out`); the
//! process exit status is 0 on success, 1 on a domain or check failure and 2
//! on a configuration error.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::integrals::{ReferenceKind, ReferencePolicy};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefArg {
    Auto,
    TurningMin,
    TurningMax,
    Inertial,
}

impl RefArg {
    pub fn policy(self) -> ReferencePolicy {
        match self {
            RefArg::Auto => ReferencePolicy::Auto,
            RefArg::TurningMin => ReferencePolicy::Fixed(ReferenceKind::TurningMin),
            RefArg::TurningMax => ReferencePolicy::Fixed(ReferenceKind::TurningMax),
            RefArg::Inertial => ReferencePolicy::Fixed(ReferenceKind::Inertial),
        }
    }
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output path (JSON report, or the trajectory CSV for `simulate`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Relative/absolute tolerance of the ODE integrator [default: 1e-10].
    #[arg(long, global = true, value_name = "TOL")]
    pub ode_tol: Option<f64>,
    /// Tolerance of the adaptive quadrature [default: 1e-12].
    #[arg(long, global = true, value_name = "TOL")]
    pub quad_tol: Option<f64>,
    /// Reference-point policy for Theta and T.
    #[arg(long = "ref", global = true, value_enum)]
    pub reference: Option<RefArg>,
    /// Ambient dimension for n-dimensional workflows.
    #[arg(long, global = true, value_name = "DIM")]
    pub n: Option<usize>,
}

/// Potential and `(L, E)` given directly on the command line.
#[derive(Debug, Clone, Default, Args)]
pub struct ForceArgs {
    /// Potential family: kepler, perturbed or power.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Exponent of the power-law force `F = -k r^p`.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "L", allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long = "E", allow_negative_numbers = true)]
    pub e: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Conservation,
    Oracle,
    Symmetry,
    Geometry,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the equations of motion; writes a CSV trajectory and an events JSON.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        t_end: Option<f64>,
    },
    /// Evaluate (L, E, Theta, T) at the initial state or at time `--at`.
    Integrals {
        #[arg(long, allow_negative_numbers = true)]
        at: Option<f64>,
    },
    /// Classify the motion for a potential, L and E.
    Classify {
        #[command(flatten)]
        force: ForceArgs,
    },
    /// Apsidal angle, radial period and closure verdict.
    Precession {
        #[command(flatten)]
        force: ForceArgs,
    },
    /// Theta-hat, the generalized LRL vector and its inertial variant at sampled times.
    Lrl {
        #[arg(long, allow_negative_numbers = true, num_args = 1..)]
        at: Vec<f64>,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples per check.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Parser)]
#[command(name = "central-force", version, about = "First integrals and hidden symmetries of central-force motion")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
