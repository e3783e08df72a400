//! Command-line front end for the `ulyap` engine.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{AngleSpec, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] ulyap::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse output: {0}")]
    Parse(String),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ulyap", version, about = "Lyapunov exponents of random unitary band operators")]
pub struct Cli {
    /// TOML run configuration; built-in defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override fields of the configuration file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub t: Option<f64>,
    /// Chain length.
    #[arg(long, short = 'n')]
    pub n: Option<usize>,
    /// Number of independent realizations.
    #[arg(long, short = 'R')]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run the regime classifier at each point.
    #[arg(long)]
    pub classify: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.output {
            cfg.output = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(k) = self.threads {
            cfg.threads = Some(k);
        }
        cfg.classify |= self.classify;
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the exponent over the configured quasi-energy grid.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate the exponent at a single quasi-energy.
    Estimate {
        /// Quasi-energy in radians or as a pi-literal (e.g. "pi/2").
        #[arg(long, allow_hyphen_values = true)]
        lambda: AngleSpec,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Non-compactness and irreducibility witnesses for the measure's support.
    Diagnose {
        #[arg(long, allow_hyphen_values = true)]
        lambda: AngleSpec,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Run the exact-identity suites.
    Verify {
        /// Extra disorder values to check (the configured t is always included).
        #[arg(long)]
        t: Vec<f64>,
        #[arg(long, hide = true)]
        corrupt_stencil: bool,
    },
    /// Print the resolved configuration as TOML.
    Config {
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {k} worker threads: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn emit(cfg: &RunConfig, report: &output::Report, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            output::write_report(&mut file, report, cfg.format)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
        }
        None => output::write_report(stdout, report, cfg.format)?,
    }
    Ok(())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = load(&cli.config)?;
    match cli.command {
        Command::Sweep { overrides } => {
            overrides.apply(&mut cfg);
            cfg.resolve()?;
            let report = with_threads(cfg.threads, || commands::sweep(&cfg))??;
            emit(&cfg, &report, stdout)
        }
        Command::Estimate { lambda, overrides } => {
            overrides.apply(&mut cfg);
            cfg.resolve()?;
            let report = with_threads(cfg.threads, || commands::estimate(&cfg, &lambda))??;
            emit(&cfg, &report, stdout)
        }
        Command::Diagnose { lambda, t } => {
            if let Some(t) = t {
                cfg.t = t;
            }
            let report = commands::diagnose(&cfg, &lambda)?;
            serde_json::to_writer_pretty(&mut *stdout, &report).map_err(std::io::Error::from)?;
            writeln!(stdout)?;
            Ok(())
        }
        Command::Verify { mut t, corrupt_stencil } => {
            cfg.disorder()?;
            t.push(cfg.t);
            let opts = verify::VerifyOptions { ts: t, corrupt_stencil };
            let results = verify::run_suites(&opts).map_err(|e| CliError::Config(e.to_string()))?;
            write!(stdout, "{}", verify::summary(&results))?;
            if results.iter().all(verify::SuiteResult::passed) {
                writeln!(stdout, "all {} suites passed", results.len())?;
                Ok(())
            } else {
                Err(CliError::Verification)
            }
        }
        Command::Config { overrides } => {
            overrides.apply(&mut cfg);
            cfg.resolve()?;
            write!(stdout, "{}", cfg.to_toml())?;
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
