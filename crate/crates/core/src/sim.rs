//! Kinematic model of a lift-and-telescope mobile manipulator.
//!
//! The base is a differential drive integrated with explicit Euler. A mast
//! carries a vertical lift; the arm telescopes sideways to the robot's right,
//! perpendicular to the driving direction, and ends in a two-axis wrist and a
//! gripper. All joints are clamped to their limits after every step.
//!
//! Objects are points. Closing the gripper below `grasp_close` near an
//! attachable object picks it up; opening past `grasp_release` drops it at
//! the end-effector position.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::mapping::Actuator;
use crate::session::CommandFrame;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Pose3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Pose3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Pose3 { x, y, z }
    }
}

impl From<Pose3> for [f64; 3] {
    fn from(p: Pose3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Pose3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Pose3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotLimits {
    pub lift_max: f64,
    pub ext_max: f64,
    pub wrist_pitch_min: f64,
    pub wrist_pitch_max: f64,
    pub wrist_yaw_min: f64,
    pub wrist_yaw_max: f64,
    /// Lateral distance from the base center to the retracted arm tip.
    pub arm_base_offset: f64,
    pub grasp_close: f64,
    pub grasp_release: f64,
    pub grasp_radius: f64,
}

impl Default for RobotLimits {
    fn default() -> Self {
        Self {
            lift_max: 1.1,
            ext_max: 0.52,
            wrist_pitch_min: -FRAC_PI_2,
            wrist_pitch_max: FRAC_PI_2,
            wrist_yaw_min: -FRAC_PI_2,
            wrist_yaw_max: FRAC_PI_2,
            arm_base_offset: 0.2,
            grasp_close: 0.3,
            grasp_release: 0.7,
            grasp_radius: 0.08,
        }
    }
}

impl RobotLimits {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            self.lift_max,
            self.ext_max,
            self.wrist_pitch_min,
            self.wrist_pitch_max,
            self.wrist_yaw_min,
            self.wrist_yaw_max,
            self.arm_base_offset,
            self.grasp_close,
            self.grasp_release,
            self.grasp_radius,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err("robot limits must be finite".into());
        }
        if self.lift_max <= 0.0 || self.ext_max <= 0.0 || self.grasp_radius <= 0.0 {
            return Err("robot.lift_max, robot.ext_max and robot.grasp_radius must be positive".into());
        }
        if self.arm_base_offset < 0.0 {
            return Err("robot.arm_base_offset must not be negative".into());
        }
        if self.wrist_pitch_min >= self.wrist_pitch_max || self.wrist_yaw_min >= self.wrist_yaw_max {
            return Err("robot wrist ranges must be non-degenerate".into());
        }
        if !(0.0 < self.grasp_close && self.grasp_close < self.grasp_release && self.grasp_release < 1.0) {
            return Err("robot grasp thresholds must satisfy 0 < close < release < 1".into());
        }
        Ok(())
    }

    /// Closed interval of a joint, or `None` for the unbounded base.
    pub fn range(&self, actuator: Actuator) -> Option<(f64, f64)> {
        match actuator {
            Actuator::BaseTranslate | Actuator::BaseRotate => None,
            Actuator::Lift => Some((0.0, self.lift_max)),
            Actuator::ArmExtend => Some((0.0, self.ext_max)),
            Actuator::WristPitch => Some((self.wrist_pitch_min, self.wrist_pitch_max)),
            Actuator::WristYaw => Some((self.wrist_yaw_min, self.wrist_yaw_max)),
            Actuator::Gripper => Some((0.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub base_x: f64,
    pub base_y: f64,
    /// Counter-clockwise from +x, radians; not wrapped.
    pub heading: f64,
    pub lift: f64,
    pub arm_ext: f64,
    pub wrist_pitch: f64,
    pub wrist_yaw: f64,
    /// 0 closed, 1 fully open.
    pub grip: f64,
    /// Index into the world's object list.
    pub held_object: Option<usize>,
}

impl RobotState {
    /// Homed pose: at the origin facing +x, lift low, arm retracted, wrist
    /// stowed, gripper half open.
    pub fn home() -> Self {
        Self {
            base_x: 0.0,
            base_y: 0.0,
            heading: 0.0,
            lift: 0.3,
            arm_ext: 0.0,
            wrist_pitch: 0.0,
            wrist_yaw: 0.0,
            grip: 0.5,
            held_object: None,
        }
    }

    pub fn joint(&self, actuator: Actuator) -> Option<f64> {
        match actuator {
            Actuator::BaseTranslate | Actuator::BaseRotate => None,
            Actuator::Lift => Some(self.lift),
            Actuator::ArmExtend => Some(self.arm_ext),
            Actuator::WristPitch => Some(self.wrist_pitch),
            Actuator::WristYaw => Some(self.wrist_yaw),
            Actuator::Gripper => Some(self.grip),
        }
    }

    pub fn within_limits(&self, limits: &RobotLimits) -> bool {
        Actuator::ALL.into_iter().all(|a| match (self.joint(a), limits.range(a)) {
            (Some(q), Some((lo, hi))) => lo <= q && q <= hi,
            _ => true,
        })
    }
}

/// End-effector position plus the wrist orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndEffector {
    pub position: Pose3,
    pub heading: f64,
    pub wrist_pitch: f64,
    pub wrist_yaw: f64,
}

pub fn end_effector_pose(state: &RobotState, limits: &RobotLimits) -> EndEffector {
    let reach = limits.arm_base_offset + state.arm_ext;
    let (sin, cos) = state.heading.sin_cos();
    EndEffector {
        position: Pose3 {
            x: state.base_x + reach * sin,
            y: state.base_y - reach * cos,
            z: state.lift,
        },
        heading: state.heading,
        wrist_pitch: state.wrist_pitch,
        wrist_yaw: state.wrist_yaw,
    }
}

/// Joints that arrived at a limit during this step.
pub fn clamp_report(before: &RobotState, after: &RobotState, limits: &RobotLimits) -> BTreeSet<Actuator> {
    Actuator::ALL
        .into_iter()
        .filter(|a| {
            let (Some(q0), Some(q1), Some((lo, hi))) = (before.joint(*a), after.joint(*a), limits.range(*a))
            else {
                return false;
            };
            (q1 == lo && q0 != lo) || (q1 == hi && q0 != hi)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldObject {
    pub name: String,
    pub pose: Pose3,
    pub attachable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub robot: RobotState,
    pub objects: Vec<WorldObject>,
}

impl World {
    pub fn new(objects: Vec<WorldObject>) -> Self {
        Self { robot: RobotState::home(), objects }
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn held_name(&self) -> Option<&str> {
        self.robot.held_object.map(|i| self.objects[i].name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub clamped: BTreeSet<Actuator>,
    pub attached: Option<usize>,
    pub released: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite velocity command for {0}")]
    NonFiniteCommand(Actuator),
    #[error("time step must be positive and finite, got {0}")]
    InvalidDt(f64),
}

#[derive(Debug, Clone)]
pub struct Simulator {
    limits: RobotLimits,
    speed_caps: [f64; 7],
}

impl Simulator {
    pub fn new(limits: RobotLimits) -> Self {
        Self { limits, speed_caps: Actuator::ALL.map(Actuator::default_v_max) }
    }

    pub fn from_config(cfg: &PipelineConfig) -> Self {
        Self { limits: cfg.robot, speed_caps: Actuator::ALL.map(|a| cfg.v_max(a)) }
    }

    pub fn limits(&self) -> &RobotLimits {
        &self.limits
    }

    fn command(&self, frame: &CommandFrame, a: Actuator) -> f64 {
        let cap = self.speed_caps[a.index()];
        frame.get(a).clamp(-cap, cap)
    }

    /// Integrates joints and base for `dt` seconds. Object handling is left
    /// to [`Simulator::step`].
    ///
    /// `BaseRotate` is clockwise-positive, so it lowers the heading.
    pub fn step_robot(&self, state: &RobotState, frame: &CommandFrame, dt: f64) -> Result<RobotState, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidDt(dt));
        }
        if let Some((a, _)) = frame.velocities.iter().find(|(_, v)| !v.is_finite()) {
            return Err(SimError::NonFiniteCommand(*a));
        }
        let l = &self.limits;
        let v = self.command(frame, Actuator::BaseTranslate);
        let omega = -self.command(frame, Actuator::BaseRotate);
        let joint = |a: Actuator, q: f64| {
            let (lo, hi) = l.range(a).expect("bounded joint");
            (q + self.command(frame, a) * dt).clamp(lo, hi)
        };
        let mut next = *state;
        if v != 0.0 {
            let (sin, cos) = state.heading.sin_cos();
            next.base_x += v * cos * dt;
            next.base_y += v * sin * dt;
        }
        next.heading += omega * dt;
        next.lift = joint(Actuator::Lift, state.lift);
        next.arm_ext = joint(Actuator::ArmExtend, state.arm_ext);
        next.wrist_pitch = joint(Actuator::WristPitch, state.wrist_pitch);
        next.wrist_yaw = joint(Actuator::WristYaw, state.wrist_yaw);
        next.grip = joint(Actuator::Gripper, state.grip);
        Ok(next)
    }

    /// Advances the world one step. On error the world is left untouched.
    pub fn step(&self, world: &mut World, frame: &CommandFrame, dt: f64) -> Result<StepReport, SimError> {
        let before = world.robot;
        let mut after = self.step_robot(&before, frame, dt)?;
        let mut report = StepReport { clamped: clamp_report(&before, &after, &self.limits), ..Default::default() };
        let ee = end_effector_pose(&after, &self.limits).position;

        match after.held_object {
            Some(idx) if after.grip > self.limits.grasp_release => {
                world.objects[idx].pose = ee;
                after.held_object = None;
                report.released = Some(idx);
            }
            Some(_) => {}
            None if before.grip >= self.limits.grasp_close && after.grip < self.limits.grasp_close => {
                let nearest = world
                    .objects
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| o.attachable)
                    .map(|(i, o)| (i, o.pose.distance(&ee)))
                    .filter(|(_, d)| *d <= self.limits.grasp_radius)
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((idx, _)) = nearest {
                    after.held_object = Some(idx);
                    report.attached = Some(idx);
                }
            }
            None => {}
        }
        if let Some(idx) = after.held_object {
            world.objects[idx].pose = ee;
        }
        world.robot = after;
        Ok(report)
    }
}
