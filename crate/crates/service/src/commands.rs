//! Headless subcommands: replay, metrics and simulate.

use std::fs;
use std::path::{Path, PathBuf};

use hat_core::pipeline::{replay, simulate, ReplayError};
use hat_core::scenario::{Scenario, ScenarioError};
use hat_core::script::{MalformedScript, Script};
use hat_core::trace::{Trace, TraceError};
use hat_core::TaskMetrics;
use thiserror::Error;

use crate::config::{ServiceConfig, ServiceConfigError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ServiceConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Script(#[from] MalformedScript),
}

impl From<ReplayError> for CommandError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::Trace(t) => CommandError::Trace(t),
        }
    }
}

fn read(path: &Path) -> Result<String, CommandError> {
    fs::read_to_string(path).map_err(|source| CommandError::Read { path: path.into(), source })
}

/// The trace's own scenario, or the configured one for a headerless trace.
fn scenario_for(trace: &Trace, cfg: &ServiceConfig) -> Result<Scenario, CommandError> {
    Ok(match trace.scenario() {
        Some(id) => Scenario::bundled(id),
        None => cfg.scenario()?,
    })
}

pub fn replay_file(trace_path: &Path, cfg: &ServiceConfig) -> Result<TaskMetrics, CommandError> {
    let trace = Trace::parse(&read(trace_path)?)?;
    let scenario = scenario_for(&trace, cfg)?;
    let outcome = replay(&trace, &scenario, &cfg.pipeline)?;
    if outcome.config_mismatch {
        eprintln!("warning: {} was recorded under a different configuration", trace_path.display());
    }
    Ok(outcome.metrics)
}

pub fn simulate_file(
    scenario: &str,
    script_path: &Path,
    emit_trace: Option<&Path>,
    cfg: &ServiceConfig,
) -> Result<TaskMetrics, CommandError> {
    let scenario = Scenario::load(scenario)?;
    let script = Script::parse(&read(script_path)?)?;
    let outcome = simulate(&script, &scenario, &cfg.pipeline);
    if let Some(path) = emit_trace {
        fs::write(path, outcome.recording.to_text())
            .map_err(|source| CommandError::Write { path: path.into(), source })?;
    }
    Ok(outcome.metrics)
}
