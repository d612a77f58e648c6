//! Service configuration file.
//!
//! ```toml
//! listen = "127.0.0.1:8765"
//! scenario = "cup"
//! trace_dir = "traces"
//! strict_gating = true
//! watchdog_ms = 300
//!
//! [thresholds.roll]
//! low_pos = 15.0
//! high_pos = 45.0
//! low_neg = -15.0
//! high_neg = -45.0
//!
//! [actuators.base_translate]
//! v_max = 0.3
//! ```
//!
//! Every key is optional. Pipeline keys (`watchdog_ms`, `thresholds`,
//! `actuators`, `shake`, `robot`, `recalibrate_on_start`) sit at the top level
//! next to the service keys.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use hat_core::scenario::{Scenario, ScenarioError};
use hat_core::PipelineConfig;
use serde::Deserialize;
use thiserror::Error;

pub const LISTEN_ENV: &str = "HAT_LISTEN";
pub const CONFIG_ENV: &str = "HAT_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Bundled scenario id or path to a scenario file.
    pub scenario: String,
    /// Where live sessions are recorded; `trace_dir = ""` disables recording.
    pub trace_dir: Option<PathBuf>,
    /// Accept command tokens only right after a head shake.
    pub strict_gating: bool,
    pub pipeline: PipelineConfig,
}

const SERVICE_KEYS: [&str; 4] = ["listen", "scenario", "trace_dir", "strict_gating"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceKeys {
    listen: Option<SocketAddr>,
    scenario: Option<String>,
    trace_dir: Option<PathBuf>,
    strict_gating: Option<bool>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8765)),
            scenario: "cup".into(),
            trace_dir: Some(PathBuf::from("traces")),
            strict_gating: true,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid {LISTEN_ENV} `{0}`")]
    Listen(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl ServiceConfig {
    /// Service keys are split off and the rest must be a valid pipeline
    /// config, so a misspelled key is an error rather than ignored.
    pub fn from_toml(text: &str) -> Result<Self, ServiceConfigError> {
        let parse = |e: toml::de::Error| ServiceConfigError::Parse(e.to_string());
        let mut rest: toml::Table = toml::from_str(text).map_err(parse)?;
        let mut own = toml::Table::new();
        for key in SERVICE_KEYS {
            if let Some(v) = rest.remove(key) {
                own.insert(key.to_string(), v);
            }
        }
        let keys: ServiceKeys = own.try_into().map_err(parse)?;
        let pipeline: PipelineConfig = rest.try_into().map_err(parse)?;
        pipeline.validate().map_err(|e| ServiceConfigError::Parse(e.to_string()))?;
        let defaults = Self::default();
        Ok(Self {
            listen: keys.listen.unwrap_or(defaults.listen),
            scenario: keys.scenario.unwrap_or(defaults.scenario),
            trace_dir: match keys.trace_dir {
                Some(p) if p.as_os_str().is_empty() => None,
                Some(p) => Some(p),
                None => defaults.trace_dir,
            },
            strict_gating: keys.strict_gating.unwrap_or(defaults.strict_gating),
            pipeline,
        })
    }

    pub fn load_file(path: &Path) -> Result<Self, ServiceConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ServiceConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    /// Loads `path` if given, else the file named by `HAT_CONFIG`, else the
    /// defaults; then applies `HAT_LISTEN`.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ServiceConfigError> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let mut cfg = match path.or(from_env.as_deref()) {
            Some(p) => Self::load_file(p)?,
            None => Self::default(),
        };
        if let Ok(listen) = std::env::var(LISTEN_ENV) {
            cfg.listen = listen.parse().map_err(|_| ServiceConfigError::Listen(listen))?;
        }
        Ok(cfg)
    }

    pub fn scenario(&self) -> Result<Scenario, ScenarioError> {
        Scenario::load(&self.scenario)
    }
}
