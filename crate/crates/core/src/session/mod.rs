//! Mode state machine and the 10 Hz command tick.
//!
//! A [`Session`] owns everything about one operator: calibration, active
//! mode, the shake trigger, and the most recent orientation sample. Samples
//! arrive at ~20 Hz; [`Session::tick`] runs every 100 ms and always uses the
//! newest sample.
//!
//! Motion is only ever commanded when the session is calibrated, not
//! listening for a command token, and has heard from the sensor within the
//! watchdog period. Every other state yields the all-zero frame.

mod frame;
mod shake;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use frame::{dispatch, stop_all, CommandFrame};
pub use shake::{detect_shake, ShakeConfig, ShakeDetector};

use crate::angle::delta_deg;
use crate::config::PipelineConfig;
use crate::mapping::{
    axis_velocity, calibrate, in_deadzone, Actuator, AxisVelocity, CalibrationState, HeadAxis,
    MappingError,
};
use crate::protocol::{ControlEvent, EventKind, OrientationSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Drive,
    Arm,
    Wrist,
    Gripper,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Drive, Mode::Arm, Mode::Wrist, Mode::Gripper];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Drive => "drive",
            Mode::Arm => "arm",
            Mode::Wrist => "wrist",
            Mode::Gripper => "gripper",
        }
    }

    /// Actuators driven by (roll, pitch) in this mode.
    pub fn actuators(self) -> (Option<Actuator>, Actuator) {
        match self {
            Mode::Drive => (Some(Actuator::BaseRotate), Actuator::BaseTranslate),
            Mode::Arm => (Some(Actuator::ArmExtend), Actuator::Lift),
            Mode::Wrist => (Some(Actuator::WristYaw), Actuator::WristPitch),
            Mode::Gripper => (None, Actuator::Gripper),
        }
    }

    pub fn owns(self, actuator: Actuator) -> bool {
        let (roll, pitch) = self.actuators();
        roll == Some(actuator) || pitch == actuator
    }

    fn from_switch(kind: EventKind) -> Option<Mode> {
        match kind {
            EventKind::SwitchDrive => Some(Mode::Drive),
            EventKind::SwitchArm => Some(Mode::Arm),
            EventKind::SwitchWrist => Some(Mode::Wrist),
            EventKind::SwitchGripper => Some(Mode::Gripper),
            EventKind::Start | EventKind::Unrecognized => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Uncalibrated,
    Active { mode: Mode, calibration: CalibrationState },
}

impl Phase {
    pub fn mode(&self) -> Option<Mode> {
        match self {
            Phase::Uncalibrated => None,
            Phase::Active { mode, .. } => Some(*mode),
        }
    }
}

/// Whether command tokens require a preceding head shake.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gating {
    /// Live operation: tokens are only accepted while listening.
    Strict,
    /// Replay and scripted runs: tokens are taken at face value.
    Trusted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NotListening,
    NotCalibrated,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NotListening => "not_listening",
            RejectReason::NotCalibrated => "not_calibrated",
        }
    }
}

/// What a command token did to the session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventOutcome {
    Calibrated(CalibrationState),
    /// `start` while active with recalibration disabled.
    StartIgnored,
    Switched { from: Mode, to: Mode },
    /// The recognizer could not identify the phrase.
    Repeat,
    Rejected(RejectReason),
}

impl EventOutcome {
    /// True when the token had its intended effect (or was a no-op switch).
    pub fn accepted(&self) -> bool {
        matches!(
            self,
            EventOutcome::Calibrated(_) | EventOutcome::StartIgnored | EventOutcome::Switched { .. }
        )
    }

    /// Text of the confirmation played back to the operator.
    pub fn confirmation(&self, kind: EventKind) -> &'static str {
        if self.accepted() {
            kind.as_str()
        } else {
            "repeat"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

#[derive(Debug, Clone)]
pub struct Session {
    cfg: PipelineConfig,
    gating: Gating,
    phase: Phase,
    awaiting_command: bool,
    latest_sample: Option<OrientationSample>,
    yaw_ref: Option<f64>,
    shake: ShakeDetector,
}

impl Session {
    pub fn new(cfg: PipelineConfig, gating: Gating) -> Self {
        let shake = ShakeDetector::new(cfg.shake);
        Self {
            cfg,
            gating,
            phase: Phase::Uncalibrated,
            awaiting_command: false,
            latest_sample: None,
            yaw_ref: None,
            shake,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn mode(&self) -> Option<Mode> {
        self.phase.mode()
    }

    pub fn is_calibrated(&self) -> bool {
        matches!(self.phase, Phase::Active { .. })
    }

    pub fn awaiting_command(&self) -> bool {
        self.awaiting_command
    }

    pub fn latest_sample(&self) -> Option<&OrientationSample> {
        self.latest_sample.as_ref()
    }

    pub fn gating(&self) -> Gating {
        self.gating
    }

    /// True when no sample has arrived within the watchdog period.
    pub fn watchdog_expired(&self, now_ms: u32) -> bool {
        match &self.latest_sample {
            None => true,
            Some(s) => now_ms.saturating_sub(s.t_ms) > self.cfg.watchdog_ms,
        }
    }

    /// Takes a new sample (its `t_ms` is the arrival time). Returns true if
    /// a head shake completed, which opens the listening window.
    pub fn ingest_sample(&mut self, sample: OrientationSample) -> bool {
        let yaw_ref = *self.yaw_ref.get_or_insert(f64::from(sample.yaw));
        self.latest_sample = Some(sample);
        let fired = self.shake.observe(sample.t_ms, delta_deg(f64::from(sample.yaw), yaw_ref));
        if fired {
            self.awaiting_command = true;
        }
        fired
    }

    /// Opens the listening window without a shake, for transports whose
    /// trigger is a switch or clicker.
    pub fn begin_listening(&mut self) {
        self.awaiting_command = true;
    }

    pub fn handle_event(&mut self, event: &ControlEvent) -> Result<EventOutcome, SessionError> {
        if self.gating == Gating::Strict && !self.awaiting_command {
            return Ok(EventOutcome::Rejected(RejectReason::NotListening));
        }
        self.awaiting_command = false;
        match event.kind {
            EventKind::Start => {
                if self.is_calibrated() && !self.cfg.recalibrate_on_start {
                    return Ok(EventOutcome::StartIgnored);
                }
                let calibration = calibrate(self.latest_sample.as_ref())?;
                if let Some(s) = &self.latest_sample {
                    self.yaw_ref = Some(f64::from(s.yaw));
                }
                self.shake.reset();
                self.phase = Phase::Active { mode: Mode::Drive, calibration };
                Ok(EventOutcome::Calibrated(calibration))
            }
            EventKind::Unrecognized => Ok(EventOutcome::Repeat),
            kind => {
                let to = Mode::from_switch(kind).expect("switch token");
                match self.phase {
                    Phase::Uncalibrated => Ok(EventOutcome::Rejected(RejectReason::NotCalibrated)),
                    Phase::Active { mode: from, calibration } => {
                        self.phase = Phase::Active { mode: to, calibration };
                        Ok(EventOutcome::Switched { from, to })
                    }
                }
            }
        }
    }

    /// Computes the command frame for a tick at `now_ms`.
    pub fn tick(&self, now_ms: u32) -> CommandFrame {
        let Phase::Active { mode, calibration } = self.phase else {
            return stop_all(now_ms);
        };
        if self.awaiting_command || self.watchdog_expired(now_ms) {
            return stop_all(now_ms);
        }
        let Some(sample) = self.latest_sample else {
            return stop_all(now_ms);
        };
        let roll = f64::from(sample.roll);
        let pitch = f64::from(sample.pitch);
        let thr_roll = self.cfg.thresholds_for(HeadAxis::Roll);
        let thr_pitch = self.cfg.thresholds_for(HeadAxis::Pitch);
        if in_deadzone(roll, pitch, &calibration, thr_roll, thr_pitch) {
            return stop_all(now_ms);
        }
        let (roll_act, pitch_act) = mode.actuators();
        let roll_v = roll_act.map_or(AxisVelocity::ZERO, |a| {
            axis_velocity(roll, calibration.theta_c_roll, thr_roll, &self.cfg.actuator_params(a))
        });
        let pitch_v = axis_velocity(
            pitch,
            calibration.theta_c_pitch,
            thr_pitch,
            &self.cfg.actuator_params(pitch_act),
        );
        CommandFrame {
            t_ms: now_ms,
            velocities: dispatch(mode, roll_v, pitch_v),
        }
    }
}
