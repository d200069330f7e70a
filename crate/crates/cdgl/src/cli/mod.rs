//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when a proof fails, a play errors or a
//! postcondition is violated, 2 on usage, parse and I/O errors.

macro_rules! out {
    ($($t:tt)*) => { $crate::cli::emit(format_args!($($t)*)) };
}

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigError, OraclePolicy, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "cdgl", version, about = "Check CdGL proofs, extract strategies and play them")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// TOML run configuration.
    #[arg(long, global = true, env = "CDGL_CONFIG")]
    pub config: Option<PathBuf>,
    /// Trace precision k (bits).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    #[arg(long, global = true)]
    pub repeat_cap: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub oracle: Option<OraclePolicy>,
    /// Same as `--oracle strict`.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Tolerance for ODE solution checks, a rational such as 1/1024.
    #[arg(long, global = true)]
    pub solves_tol: Option<String>,
    /// Sample grid size for ODE solution checks.
    #[arg(long, global = true)]
    pub grid: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every theorem of a proof file.
    Check {
        source: PathBuf,
        proofs: PathBuf,
        /// Only this theorem.
        #[arg(long)]
        theorem: Option<String>,
        /// Print results as JSON.
        #[arg(long)]
        json: bool,
        /// Print the sequent of every Assumed leaf.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Describe the strategy extracted from a checked theorem.
    Extract { source: PathBuf, proofs: PathBuf, theorem: String },
    /// Play a checked theorem's game against a scripted opponent.
    Play {
        source: PathBuf,
        proofs: PathBuf,
        theorem: String,
        #[command(flatten)]
        players: Players,
        /// Write the trace JSON here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Play many seeded runs in parallel and write one trace per run.
    Sweep {
        source: PathBuf,
        proofs: PathBuf,
        theorem: String,
        #[command(flatten)]
        players: Players,
        #[arg(long, default_value_t = 20)]
        runs: u64,
        /// Directory for `trace-<seed>.json` files.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Free, bound and must-bound variables of a game, formula or term.
    Statics {
        /// A declared name or inline text.
        expr: String,
        /// Declarations the expression may refer to.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Print a `.cdgl` or `.cdglp` file in normal form.
    Fmt {
        file: PathBuf,
        /// Declarations for a proof file (defaults to the `.cdgl` next to it).
        #[arg(long)]
        source: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Players {
    /// Scripted Angel: `fixed:V` or `uniform:LO,HI` for every `x:=*` and ODE duration, or a JSON script.
    #[arg(long)]
    pub angel: Option<String>,
    /// Scripted Demon, same forms as `--angel`.
    #[arg(long)]
    pub demon: Option<String>,
    /// Play this declared game instead of the theorem's own.
    #[arg(long)]
    pub game: Option<String>,
    /// Initial values, e.g. `--set x=1/2`; unset variables start at 0.
    #[arg(long = "set", value_name = "VAR=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    /// A proof, play or postcondition failed; the report was printed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl GlobalOpts {
    /// Config file (if any) with command-line overrides applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.precision {
            cfg.precision = v;
        }
        if let Some(v) = self.repeat_cap {
            cfg.repeat_cap = v;
        }
        if let Some(v) = self.oracle {
            cfg.oracle = v;
        }
        if self.strict {
            cfg.oracle = OraclePolicy::Strict;
        }
        if let Some(v) = &self.solves_tol {
            cfg.solves_tol = v.clone();
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Runs a parsed command line, printing reports to stdout. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let res = cli.global.resolve().and_then(|cfg| commands::dispatch(&cli.cmd, &cfg));
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cdgl: {e}");
            e.exit_code()
        }
    }
}

/// Prints a line to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
pub(crate) fn emit(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut lock = std::io::stdout().lock();
    if let Err(e) = writeln!(lock, "{args}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}
