use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::{Command, Format, RunConfig, ScanMode, UsageError};

#[derive(Debug, Parser)]
#[command(name = "qcap", version, about = "Numerical checks of non-convex quantum capacities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,

    /// Seed for every sampled unitary.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Absolute tolerance for the equality checks.
    #[arg(long, global = true, env = "QCAP_ATOL", default_value_t = 1e-7)]
    pub atol: f64,

    /// Output encoding; reports default to json, scans to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Write the payload here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Record wall-clock runtime in the payload and on standard error.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Asymptotic,
    Finite,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Private-capacity construction for one (d, q, p) triple.
    VerifyPrivate {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = qcap_core::channels::DEFAULT_ROCKET_SAMPLES)]
        samples: usize,
    },
    /// Environment-assisted construction for one (d, p) pair.
    VerifyEnv {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        p: f64,
    },
    /// Sign of achievable minus converse over the (q, p) square.
    ScanRegion {
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Asymptotic)]
        mode: ModeArg,
        /// Dimension for finite mode.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Overlaps of the phase-rotated maximally entangled states.
    BellGram {
        #[arg(long)]
        d: usize,
    },
    /// Non-convexity functional of erasure against rocket branches.
    Functional {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = qcap_core::channels::DEFAULT_ROCKET_SAMPLES)]
        samples: usize,
    },
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, UsageError> {
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(UsageError(format!("--atol must be positive, got {}", self.atol)));
        }
        let command = match self.command {
            CliCommand::VerifyPrivate { d, q, p, samples } => Command::VerifyPrivate { d, q, p, samples },
            CliCommand::VerifyEnv { d, p } => Command::VerifyEnv { d, p },
            CliCommand::ScanRegion { grid, mode, d } => {
                if grid < 2 {
                    return Err(UsageError(format!("--grid must be at least 2, got {grid}")));
                }
                let mode = match (mode, d) {
                    (ModeArg::Asymptotic, None) => ScanMode::Asymptotic,
                    (ModeArg::Asymptotic, Some(_)) => {
                        return Err(UsageError("--d only applies to --mode finite".into()));
                    }
                    (ModeArg::Finite, Some(d)) => ScanMode::Finite(d),
                    (ModeArg::Finite, None) => return Err(UsageError("--mode finite needs --d".into())),
                };
                Command::ScanRegion { grid, mode }
            }
            CliCommand::BellGram { d } => Command::BellGram { d },
            CliCommand::Functional { d, q, p, samples } => Command::Functional { d, q, p, samples },
        };
        let format = match (self.format, &command) {
            (None, Command::ScanRegion { .. }) => Format::Csv,
            (None, _) | (Some(FormatArg::Json), _) => Format::Json,
            (Some(FormatArg::Csv), Command::ScanRegion { .. }) => Format::Csv,
            (Some(FormatArg::Svg), Command::ScanRegion { .. }) => Format::Svg,
            (Some(f), _) => {
                return Err(UsageError(
                    format!("--format {f:?} is only available for scan-region").to_lowercase(),
                ));
            }
        };
        Ok(RunConfig {
            command,
            seed: self.seed,
            atol: self.atol,
            format,
            out_path: self.out,
            timing: self.timing,
        })
    }
}
