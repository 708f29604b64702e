//! Experiment harness: weight tables, verification suites, constant
//! estimates and sharpness sweeps, written as CSV plus plot data.

mod commands;
mod output;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hardylab::Target;

use commands::WeightGrid;
use settings::{Common, Settings};

#[derive(Debug)]
pub enum Fail {
    /// bad flags, config or parameters outside the admissible domain
    Config(String),
    /// a computed check did not pass
    Check(String),
    Io(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Check(_) => 1,
            Fail::Config(_) | Fail::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Fail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fail::Config(m) => write!(f, "config error: {m}"),
            Fail::Check(m) => write!(f, "check failed: {m}"),
            Fail::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hardylab", version, about = "Improved Hardy inequality experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Tabulate X_1..X_k, Y_k, Z_k and their derivatives
    Weights {
        #[command(flatten)]
        common: Common,
        /// A single argument t in (0, 1]
        #[arg(long)]
        t: Option<f64>,
        /// Smallest t of the logarithmic grid
        #[arg(long)]
        t_min: Option<f64>,
        /// Largest t of the grid (default 1, or R/D when --D-mult is given)
        #[arg(long)]
        t_max: Option<f64>,
        /// Grid size
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run the property suite for one configuration
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Minimize a quotient over a trial family
    Estimate {
        #[command(flatten)]
        common: Common,
        /// theoremA, theoremB, lemma41 or quotientC
        #[arg(long)]
        target: Option<Target>,
    },
    /// Ratio along the concentrating family with a reduced exponent
    Sweep {
        #[command(flatten)]
        common: Common,
        /// theoremA or theoremB
        #[arg(long)]
        target: Option<Target>,
        /// Exponent reduction in [0, 1]; 1 is the unreduced control
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Weights, verification, estimate and both sweeps into one directory
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Weights {
            common,
            t,
            t_min,
            t_max,
            points,
        } => {
            let s = Settings::resolve(&common)?;
            let grid = WeightGrid {
                t: t.or(s.t),
                t_min: t_min.unwrap_or(s.t_min),
                t_max: t_max.or(s.t_max),
                points: points.unwrap_or(s.points),
            };
            let d_given = common.d_mult.is_some() || s.file_has("problem.d_mult");
            commands::weights(&s, &grid, d_given)
        }
        Cmd::Verify { common } => commands::verify(&Settings::resolve(&common)?),
        Cmd::Estimate { common, target } => commands::estimate(&Settings::resolve(&common)?, target),
        Cmd::Sweep { common, target, eps } => commands::sweep(&Settings::resolve(&common)?, target, eps),
        Cmd::Report { common } => commands::report(&Settings::resolve(&common)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hardylab: {e}");
            ExitCode::from(e.code())
        }
    }
}
