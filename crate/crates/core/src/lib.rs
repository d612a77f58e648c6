//! Head-tilt teleoperation of a mobile manipulator.
//!
//! A head-worn orientation sensor streams roll/pitch/yaw at 20 Hz. After a
//! `start` command captures the neutral pose, tilting the head past a
//! deadzone commands velocities on two actuators selected by the active mode
//! (drive, arm, wrist, gripper). A quick left-right head shake opens a
//! listening window in which a command token switches mode. Commands are
//! pushed to a kinematic robot model at 10 Hz.
//!
//! The crate is organised bottom-up:
//!
//! - [`protocol`]: the fixed 20-byte orientation frame and stream sequencing.
//! - [`mapping`]: calibration and the piecewise angle-to-velocity map.
//! - [`session`]: mode state machine, shake trigger, per-mode dispatch and the
//!   10 Hz command tick with its safety gates.
//! - [`sim`]: kinematic simulator with joint limits and object attachment.
//! - [`scenario`], [`trace`], [`pipeline`]: task scenarios, recorded sessions
//!   and deterministic replay with task metrics.
//! - [`script`], [`expert`]: timed head-pose scripts for headless simulation
//!   and the demonstration run bundled for every scenario.
//! - [`batch`]: data-parallel sweeps (rayon when the `parallel` feature is on).

pub mod angle;
pub mod batch;
pub mod config;
pub mod expert;
pub mod mapping;
pub mod pipeline;
pub mod protocol;
pub mod scenario;
pub mod script;
pub mod session;
pub mod sim;
pub mod trace;

pub use config::PipelineConfig;
pub use mapping::{Actuator, ActuatorParams, AxisThresholds, AxisVelocity, CalibrationState};
pub use pipeline::{Pipeline, ReplayOutcome, TaskMetrics};
pub use protocol::{ControlEvent, EventKind, OrientationSample};
pub use scenario::{Scenario, ScenarioId};
pub use session::{CommandFrame, Gating, Mode, Phase, Session};
pub use sim::{Pose3, RobotLimits, RobotState, Simulator, World};
pub use trace::{Record, Trace};
