use std::collections::BTreeMap;

use crate::mapping::{Actuator, AxisVelocity};

use super::Mode;

/// Velocities pushed to the robot on one 10 Hz tick. Actuators missing from
/// the map are commanded to zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandFrame {
    pub t_ms: u32,
    pub velocities: BTreeMap<Actuator, f64>,
}

impl CommandFrame {
    pub fn get(&self, actuator: Actuator) -> f64 {
        self.velocities.get(&actuator).copied().unwrap_or(0.0)
    }

    pub fn is_stop(&self) -> bool {
        self.velocities.values().all(|v| *v == 0.0)
    }

    pub fn with(mut self, actuator: Actuator, v: f64) -> Self {
        self.velocities.insert(actuator, v);
        self
    }
}

pub fn stop_all(t_ms: u32) -> CommandFrame {
    CommandFrame { t_ms, velocities: BTreeMap::new() }
}

/// Routes the two head-axis velocities to the actuators of `mode`.
///
/// Sign conventions: positive pitch (head down) drives forward, lowers the
/// lift, pitches the wrist down and opens the gripper; positive roll (tilt
/// right) turns clockwise, extends the arm and yaws the wrist right. The
/// lift is the one actuator whose positive direction (up) opposes head-down,
/// so its pitch velocity is negated here.
pub fn dispatch(mode: Mode, roll_v: AxisVelocity, pitch_v: AxisVelocity) -> BTreeMap<Actuator, f64> {
    let (roll_act, pitch_act) = mode.actuators();
    let mut out = BTreeMap::new();
    if let Some(a) = roll_act {
        if !roll_v.is_zero() {
            out.insert(a, roll_v.value());
        }
    }
    if !pitch_v.is_zero() {
        let v = if pitch_act == Actuator::Lift { -pitch_v.value() } else { pitch_v.value() };
        out.insert(pitch_act, v);
    }
    out
}
