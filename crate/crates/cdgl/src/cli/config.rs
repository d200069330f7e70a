use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::PlayConfig;
use crate::ode::SolvesConfig;
use crate::prover::CheckOptions;
use crate::syntax::parse_rational;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OraclePolicy {
    /// Leaves the interval oracle cannot settle become Assumed.
    #[default]
    IntervalThenAssume,
    /// Any Assumed leaf fails the check.
    Strict,
}

/// Settings shared by all commands, read from a TOML file.
///
/// ```toml
/// precision = 53
/// repeat_cap = 1000000
/// oracle = "interval-then-assume"
/// solves_tol = "1/1024"
/// grid = 128
/// seed = 0
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub precision: u32,
    pub repeat_cap: u64,
    pub oracle: OraclePolicy,
    pub solves_tol: String,
    pub grid: u32,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: crate::creal::DEFAULT_PRECISION,
            repeat_cap: 1_000_000,
            oracle: OraclePolicy::IntervalThenAssume,
            solves_tol: "1/1024".into(),
            grid: 128,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("{path}: {err}")]
    Toml { path: String, err: toml::de::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let p = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Io { path: p.clone(), err })?;
        RunConfig::from_toml(&text, &p)
    }

    /// Parses and validates TOML text; `origin` names it in errors.
    pub fn from_toml(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|err| ConfigError::Toml { path: origin.into(), err })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.precision == 0 || self.repeat_cap == 0 || self.grid == 0 {
            return Err(ConfigError::Invalid("precision, repeat_cap and grid must be positive".into()));
        }
        self.tolerance().map(|_| ())
    }

    pub fn tolerance(&self) -> Result<BigRational, ConfigError> {
        match parse_rational(&self.solves_tol) {
            Some(q) if q > BigRational::from_integer(0.into()) => Ok(q),
            _ => Err(ConfigError::Invalid(format!("solves_tol `{}` is not a positive rational", self.solves_tol))),
        }
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions { strict: self.oracle == OraclePolicy::Strict }
    }

    pub fn play_config(&self) -> Result<PlayConfig, ConfigError> {
        Ok(PlayConfig {
            precision: self.precision,
            repeat_cap: self.repeat_cap,
            solves: SolvesConfig { grid: self.grid, tol: self.tolerance()?, ..SolvesConfig::default() },
            snapshots: true,
        })
    }
}
