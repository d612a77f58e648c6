//! Calibration and the angle-to-velocity map.
//!
//! Each head axis is mapped independently. Relative to the calibrated angle
//! the map has five regions: saturated negative, negative ramp, deadzone,
//! positive ramp and saturated positive:
//!
//! ```text
//!   -v_max                 if d < high_neg
//!   k * (d - low_neg)      if high_neg <= d <= low_neg
//!   0                      if low_neg < d < low_pos
//!   k * (d - low_pos)      if low_pos <= d <= high_pos
//!   +v_max                 if d > high_pos
//! ```
//!
//! where `d` is the wrapped difference between the measured angle and the
//! calibrated one. Thresholds are stored as offsets from the calibrated angle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::delta_deg;
use crate::protocol::OrientationSample;

/// Head axis driving an actuator. Yaw never drives motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadAxis {
    Roll,
    Pitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuator {
    BaseTranslate,
    BaseRotate,
    Lift,
    ArmExtend,
    WristPitch,
    WristYaw,
    Gripper,
}

impl Actuator {
    pub const ALL: [Actuator; 7] = [
        Actuator::BaseTranslate,
        Actuator::BaseRotate,
        Actuator::Lift,
        Actuator::ArmExtend,
        Actuator::WristPitch,
        Actuator::WristYaw,
        Actuator::Gripper,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Actuator::BaseTranslate => "base_translate",
            Actuator::BaseRotate => "base_rotate",
            Actuator::Lift => "lift",
            Actuator::ArmExtend => "arm_extend",
            Actuator::WristPitch => "wrist_pitch",
            Actuator::WristYaw => "wrist_yaw",
            Actuator::Gripper => "gripper",
        }
    }

    /// The head axis this actuator listens to in its mode.
    pub fn head_axis(self) -> HeadAxis {
        match self {
            Actuator::BaseTranslate | Actuator::Lift | Actuator::WristPitch | Actuator::Gripper => {
                HeadAxis::Pitch
            }
            Actuator::BaseRotate | Actuator::ArmExtend | Actuator::WristYaw => HeadAxis::Roll,
        }
    }

    /// Default speed cap in the actuator's units per second.
    pub fn default_v_max(self) -> f64 {
        match self {
            Actuator::BaseTranslate => 0.3,
            Actuator::BaseRotate => 0.5,
            Actuator::Lift => 0.1,
            Actuator::ArmExtend => 0.1,
            Actuator::WristPitch => 0.8,
            Actuator::WristYaw => 0.8,
            Actuator::Gripper => 1.0,
        }
    }
}

impl fmt::Display for Actuator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Actuator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Actuator::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown actuator `{s}`"))
    }
}

/// Threshold offsets (degrees) from the calibrated angle for one head axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisThresholds {
    pub low_pos: f64,
    pub high_pos: f64,
    pub low_neg: f64,
    pub high_neg: f64,
}

impl Default for AxisThresholds {
    fn default() -> Self {
        Self::symmetric(15.0, 45.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("thresholds must satisfy high_neg < low_neg < low_pos < high_pos, got {0:?}")]
    UnorderedThresholds(AxisThresholds),
    #[error("actuator {0}: gain and speed cap must be positive and finite")]
    NonPositiveParams(Actuator),
    #[error("start received before any orientation sample")]
    NoSampleYet,
}

impl AxisThresholds {
    pub fn symmetric(deadzone: f64, saturation: f64) -> Self {
        Self {
            low_pos: deadzone,
            high_pos: saturation,
            low_neg: -deadzone,
            high_neg: -saturation,
        }
    }

    pub fn validate(&self) -> Result<(), MappingError> {
        let ordered = self.high_neg < self.low_neg
            && self.low_neg < self.low_pos
            && self.low_pos < self.high_pos;
        let finite = [self.low_pos, self.high_pos, self.low_neg, self.high_neg]
            .iter()
            .all(|v| v.is_finite());
        if ordered && finite {
            Ok(())
        } else {
            Err(MappingError::UnorderedThresholds(*self))
        }
    }

    /// Ramp width on the positive side, used for the default gain.
    pub fn positive_span(&self) -> f64 {
        self.high_pos - self.low_pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorParams {
    pub actuator: Actuator,
    /// Velocity units per degree of tilt past the deadzone.
    pub k: f64,
    pub v_max: f64,
}

impl ActuatorParams {
    /// Gain chosen so the ramp reaches `v_max` exactly at the high threshold.
    pub fn continuous(actuator: Actuator, v_max: f64, thresholds: &AxisThresholds) -> Self {
        Self {
            actuator,
            k: v_max / thresholds.positive_span(),
            v_max,
        }
    }

    pub fn validate(&self) -> Result<(), MappingError> {
        if self.k > 0.0 && self.v_max > 0.0 && self.k.is_finite() && self.v_max.is_finite() {
            Ok(())
        } else {
            Err(MappingError::NonPositiveParams(self.actuator))
        }
    }
}

/// Signed velocity command for one actuator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AxisVelocity(pub f64);

impl AxisVelocity {
    pub const ZERO: AxisVelocity = AxisVelocity(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Neutral head pose captured at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationState {
    pub theta_c_roll: f64,
    pub theta_c_pitch: f64,
}

impl CalibrationState {
    pub fn theta_c(&self, axis: HeadAxis) -> f64 {
        match axis {
            HeadAxis::Roll => self.theta_c_roll,
            HeadAxis::Pitch => self.theta_c_pitch,
        }
    }
}

pub fn normalize_delta(theta: f64, theta_c: f64) -> f64 {
    delta_deg(theta, theta_c)
}

/// Velocity for one head axis. The result is additionally bounded by
/// `v_max`, which only matters when a custom gain overshoots the cap.
pub fn axis_velocity(
    theta: f64,
    theta_c: f64,
    thr: &AxisThresholds,
    params: &ActuatorParams,
) -> AxisVelocity {
    let d = normalize_delta(theta, theta_c);
    let v = if d < thr.high_neg {
        -params.v_max
    } else if d <= thr.low_neg {
        params.k * (d - thr.low_neg)
    } else if d < thr.low_pos {
        0.0
    } else if d <= thr.high_pos {
        params.k * (d - thr.low_pos)
    } else {
        params.v_max
    };
    AxisVelocity(v.clamp(-params.v_max, params.v_max))
}

fn inside_deadzone(delta: f64, thr: &AxisThresholds) -> bool {
    thr.low_neg < delta && delta < thr.low_pos
}

/// True when both roll and pitch sit strictly inside their deadzones.
pub fn in_deadzone(
    roll: f64,
    pitch: f64,
    cal: &CalibrationState,
    thr_roll: &AxisThresholds,
    thr_pitch: &AxisThresholds,
) -> bool {
    inside_deadzone(normalize_delta(roll, cal.theta_c_roll), thr_roll)
        && inside_deadzone(normalize_delta(pitch, cal.theta_c_pitch), thr_pitch)
}

pub fn calibrate(sample: Option<&OrientationSample>) -> Result<CalibrationState, MappingError> {
    let s = sample.ok_or(MappingError::NoSampleYet)?;
    Ok(CalibrationState {
        theta_c_roll: f64::from(s.roll),
        theta_c_pitch: f64::from(s.pitch),
    })
}
