//! Tunables for the control pipeline.
//!
//! Everything that influences how a recorded stream turns into robot motion
//! lives here; its hash is stamped into trace headers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mapping::{Actuator, ActuatorParams, AxisThresholds, HeadAxis, MappingError};
use crate::session::ShakeConfig;
use crate::sim::RobotLimits;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub roll: AxisThresholds,
    pub pitch: AxisThresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorConfig {
    pub v_max: f64,
    /// Omitted means `v_max / (high_pos - low_pos)` of the driving axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub watchdog_ms: u32,
    pub recalibrate_on_start: bool,
    pub thresholds: ThresholdConfig,
    pub actuators: BTreeMap<Actuator, ActuatorConfig>,
    pub shake: ShakeConfig,
    pub robot: RobotLimits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let actuators = Actuator::ALL
            .into_iter()
            .map(|a| (a, ActuatorConfig { v_max: a.default_v_max(), k: None }))
            .collect();
        Self {
            watchdog_ms: 300,
            recalibrate_on_start: true,
            thresholds: ThresholdConfig::default(),
            actuators,
            shake: ShakeConfig::default(),
            robot: RobotLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn thresholds_for(&self, axis: HeadAxis) -> &AxisThresholds {
        match axis {
            HeadAxis::Roll => &self.thresholds.roll,
            HeadAxis::Pitch => &self.thresholds.pitch,
        }
    }

    pub fn actuator_params(&self, actuator: Actuator) -> ActuatorParams {
        let thr = self.thresholds_for(actuator.head_axis());
        let entry = self
            .actuators
            .get(&actuator)
            .copied()
            .unwrap_or(ActuatorConfig { v_max: actuator.default_v_max(), k: None });
        let mut params = ActuatorParams::continuous(actuator, entry.v_max, thr);
        if let Some(k) = entry.k {
            params.k = k;
        }
        params
    }

    pub fn v_max(&self, actuator: Actuator) -> f64 {
        self.actuator_params(actuator).v_max
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.roll.validate()?;
        self.thresholds.pitch.validate()?;
        for a in Actuator::ALL {
            self.actuator_params(a).validate()?;
        }
        if self.watchdog_ms == 0 {
            return Err(ConfigError::Invalid("watchdog_ms must be positive".into()));
        }
        self.shake.validate().map_err(ConfigError::Invalid)?;
        self.robot.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config always serializes")
    }

    /// Same config with every actuator listed explicitly.
    pub fn canonical(&self) -> Self {
        let mut out = self.clone();
        for a in Actuator::ALL {
            out.actuators.entry(a).or_insert(ActuatorConfig { v_max: a.default_v_max(), k: None });
        }
        out
    }

    /// SHA-256 of the canonical serialization, as 64 lowercase hex digits.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical().to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
