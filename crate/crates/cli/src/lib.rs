//! Command-line front end for the qcap experiments.
//!
//! Reports are emitted as JSON with lexicographically sorted keys; region
//! scans as CSV (`q,p,delta`) or an SVG heatmap. Exit codes: 0 when every
//! check passes, 1 on a failed check, 2 on bad usage, 3 on I/O failure.

mod args;
pub mod render;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use qcap_core::experiments::{
    bell_gram_report, env_experiment_with, functional_experiment, private_experiment_with, region_scan, EnvParams,
    ExperimentReport, PrivateParams, RegionMode,
};
use qcap_core::{Exec, QcapError, Tolerance};

pub use args::Cli;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Asymptotic,
    Finite(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    VerifyPrivate { d: usize, q: f64, p: f64, samples: usize },
    VerifyEnv { d: usize, p: f64 },
    ScanRegion { grid: usize, mode: ScanMode },
    BellGram { d: usize },
    Functional { d: usize, q: f64, p: f64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub atol: f64,
    pub format: Format,
    pub out_path: Option<PathBuf>,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(QcapError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) => EXIT_CHECK_FAILED,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<QcapError> for CliError {
    fn from(e: QcapError) -> Self {
        match e {
            QcapError::InvalidParameter(m) => CliError::Usage(m),
            QcapError::InvalidProbability(p) => CliError::Usage(format!("probability {p} is outside [0, 1]")),
            other => CliError::Compute(other),
        }
    }
}

/// Rendered payload plus whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payload: String,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn report_json(mut report: ExperimentReport, timing: bool) -> Outcome {
    let runtime_ms = report.runtime_ms;
    if !timing {
        report.runtime_ms = 0.0;
    }
    // serde_json's default map keeps keys sorted.
    let value = serde_json::to_value(&report).expect("reports serialise");
    let mut payload = serde_json::to_string_pretty(&value).expect("values serialise");
    payload.push('\n');
    Outcome {
        payload,
        pass: report.pass,
        runtime_ms,
    }
}

/// Runs the configured command and renders its payload.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let tol = Tolerance::new(config.atol).map_err(|e| CliError::Usage(e.to_string()))?;
    let exec = Exec::default();
    let seed = config.seed;
    let outcome = match config.command {
        Command::VerifyPrivate { d, q, p, samples } => {
            let params = PrivateParams {
                d,
                q,
                p,
                n_samples: samples,
                seed,
            };
            report_json(private_experiment_with(&params, tol, exec)?, config.timing)
        }
        Command::VerifyEnv { d, p } => report_json(env_experiment_with(&EnvParams { d, p }, tol, exec)?, config.timing),
        Command::BellGram { d } => report_json(bell_gram_report(d, tol)?, config.timing),
        Command::Functional { d, q, p, samples } => {
            let params = PrivateParams {
                d,
                q,
                p,
                n_samples: samples,
                seed,
            };
            report_json(functional_experiment(&params, tol)?, config.timing)
        }
        Command::ScanRegion { grid, mode } => {
            let start = std::time::Instant::now();
            let mode = match mode {
                ScanMode::Asymptotic => RegionMode::Asymptotic,
                ScanMode::Finite(d) => RegionMode::Finite(d),
            };
            let points = region_scan(grid, mode, exec)?;
            let payload = match config.format {
                Format::Csv => render::region_csv(&points),
                Format::Svg => render::region_svg(&points, grid),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&serde_json::to_value(&points).expect("points serialise"))
                        .expect("values serialise");
                    s.push('\n');
                    s
                }
            };
            Outcome {
                payload,
                pass: true,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        }
    };
    Ok(outcome)
}

/// Writes `payload` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, payload: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(payload.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Full run: execute, emit, and map the result to an exit code.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("qcap: {e}");
            return e.exit_code();
        }
    };
    let written = match &config.out_path {
        Some(path) => write_atomic(path, &outcome.payload),
        None => std::io::stdout().lock().write_all(outcome.payload.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("qcap: {}", CliError::Io(e));
        return EXIT_IO;
    }
    if config.timing {
        eprintln!("runtime_ms {:.3}", outcome.runtime_ms);
    }
    outcome.exit_code()
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match cli.into_config() {
        Ok(config) => run(&config),
        Err(e) => {
            eprintln!("qcap: usage error: {e}");
            EXIT_USAGE
        }
    }
}
