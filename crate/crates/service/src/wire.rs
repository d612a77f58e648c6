//! Text messages exchanged over the `/ws` websocket.
//!
//! Orientation samples travel as binary messages holding one 20-byte frame
//! (see [`hat_core::protocol`]). Everything else is a UTF-8 text message of
//! the form `kind|key=value|key=value`. Values never contain `|`; lists are
//! comma-separated and `-` stands for "none".
//!
//! Client to server:
//!
//! ```text
//! token|word=switch to arm      command token (trace name or phrase)
//! reset                         put robot and objects back, clock keeps running
//! metrics                       ask for the task metrics so far
//! ```
//!
//! Server to client:
//!
//! ```text
//! hello|scenario=cup|tick_ms=100|watchdog_ms=300|roll=-45,-15,15,45|pitch=-45,-15,15,45
//! mode|phase=active|mode=arm|awaiting=false
//! confirm|word=switch_arm|accepted=true|reason=-
//! snapshot|t_ms=1200|phase=active|mode=drive|awaiting=false|watchdog=false|delta=0.0000,30.0000
//!         |base=0.0300,0.0000,0.0000|lift=0.3000|ext=0.0000|wrist=0.0000,0.0000|grip=0.5000
//!         |ee=0.0300,-0.2000,0.3000|held=-|cmd=base_translate:0.1500|objects=cup:1.5000,-0.6000,0.9000
//!         |progress=-|done=false
//! clamp|t_ms=4100|actuators=lift,arm_extend
//! success|t_ms=36200|task_time_s=36.2
//! metrics|task_time_s=840|completed=false|mode_switches=1|resets=0|commanded_distance=0.3|nonzero_command_fraction=0.25
//! error|reason=bad_frame|detail=orientation frame must be 20 bytes, got 19
//! ```
//!
//! (The snapshot is one line; it is wrapped above for reading.)
//!
//! Every `token` gets exactly one `confirm`, in order. `word` is the
//! accepted token (`start`, `switch_drive`, `switch_arm`, `switch_wrist`,
//! `switch_gripper`) or `repeat`;
//! `reason` is `not_listening`, `not_calibrated`, `no_sample` or `-`.
//! `delta` is the roll and pitch offset from the calibrated pose in degrees.
//! A malformed text message is answered with `error` and closes the
//! connection; a malformed binary frame is answered with `error` and dropped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hat_core::mapping::normalize_delta;
use hat_core::sim::end_effector_pose;
use hat_core::{Actuator, CommandFrame, EventKind, Phase, Pipeline, TaskMetrics};

pub const SEP: char = '|';

/// Splits `kind|k=v|...` into the kind and its fields.
pub fn parse_fields(line: &str) -> Option<(&str, BTreeMap<&str, &str>)> {
    let mut parts = line.split(SEP);
    let kind = parts.next().filter(|k| !k.is_empty())?;
    let mut fields = BTreeMap::new();
    for p in parts {
        let (k, v) = p.split_once('=')?;
        fields.insert(k, v);
    }
    Some((kind, fields))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientMessage {
    Token(EventKind),
    Reset,
    Metrics,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientMessageError {
    #[error("malformed message")]
    Malformed,
    #[error("unknown message kind `{0}`")]
    UnknownKind(String),
    #[error("token message needs a `word` field")]
    MissingWord,
}

impl ClientMessage {
    /// Parses a client text message. Unknown words become
    /// [`EventKind::Unrecognized`], which the session answers with `repeat`.
    pub fn parse(line: &str) -> Result<ClientMessage, ClientMessageError> {
        let (kind, fields) = parse_fields(line.trim()).ok_or(ClientMessageError::Malformed)?;
        match kind {
            "token" => {
                let word = fields.get("word").ok_or(ClientMessageError::MissingWord)?;
                Ok(ClientMessage::Token(word.parse().unwrap_or_else(|_| EventKind::from_phrase(word))))
            }
            "reset" => Ok(ClientMessage::Reset),
            "metrics" => Ok(ClientMessage::Metrics),
            other => Err(ClientMessageError::UnknownKind(other.to_string())),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            ClientMessage::Token(kind) => format!("token|word={kind}"),
            ClientMessage::Reset => "reset".into(),
            ClientMessage::Metrics => "metrics".into(),
        }
    }
}

fn phase_fields(phase: Phase) -> (&'static str, &'static str) {
    match phase {
        Phase::Uncalibrated => ("uncalibrated", "-"),
        Phase::Active { mode, .. } => ("active", mode.as_str()),
    }
}

pub fn hello(pipeline: &Pipeline) -> String {
    let cfg = pipeline.session().config();
    let thr = |t: &hat_core::AxisThresholds| format!("{},{},{},{}", t.high_neg, t.low_neg, t.low_pos, t.high_pos);
    format!(
        "hello|scenario={}|tick_ms={}|watchdog_ms={}|roll={}|pitch={}",
        pipeline.scenario().id,
        hat_core::pipeline::TICK_MS,
        cfg.watchdog_ms,
        thr(&cfg.thresholds.roll),
        thr(&cfg.thresholds.pitch),
    )
}

pub fn mode_notice(pipeline: &Pipeline) -> String {
    let (phase, mode) = phase_fields(pipeline.session().phase());
    format!("mode|phase={phase}|mode={mode}|awaiting={}", pipeline.session().awaiting_command())
}

pub fn confirm(word: &str, accepted: bool, reason: Option<&str>) -> String {
    format!("confirm|word={word}|accepted={accepted}|reason={}", reason.unwrap_or("-"))
}

pub fn clamp_notice(t_ms: u32, actuators: impl IntoIterator<Item = Actuator>) -> String {
    let names: Vec<&str> = actuators.into_iter().map(Actuator::as_str).collect();
    format!("clamp|t_ms={t_ms}|actuators={}", names.join(","))
}

pub fn success_notice(t_ms: u32) -> String {
    format!("success|t_ms={t_ms}|task_time_s={}", f64::from(t_ms) / 1000.0)
}

/// The `key=value` lines of [`TaskMetrics::to_kv`] joined into one message.
pub fn metrics(m: &TaskMetrics) -> String {
    let mut out = String::from("metrics");
    for line in m.to_kv().lines() {
        out.push(SEP);
        out.push_str(line);
    }
    out
}

pub fn error_notice(reason: &str, detail: &str) -> String {
    format!("error|reason={reason}|detail={}", detail.replace(SEP, "/"))
}

pub fn snapshot(pipeline: &Pipeline, last_frame: &CommandFrame) -> String {
    let session = pipeline.session();
    let world = pipeline.world();
    let r = &world.robot;
    let t_ms = pipeline.sim_time_ms();
    let (phase, mode) = phase_fields(session.phase());
    let delta = match (session.phase(), session.latest_sample()) {
        (Phase::Active { calibration, .. }, Some(s)) => format!(
            "{:.4},{:.4}",
            normalize_delta(f64::from(s.roll), calibration.theta_c_roll),
            normalize_delta(f64::from(s.pitch), calibration.theta_c_pitch)
        ),
        _ => "-".into(),
    };
    let ee = end_effector_pose(r, pipeline.simulator().limits()).position;
    let cmd = if last_frame.is_stop() {
        "-".to_string()
    } else {
        last_frame
            .velocities
            .iter()
            .map(|(a, v)| format!("{}:{v:.4}", a.as_str()))
            .collect::<Vec<_>>()
            .join(",")
    };
    let objects = world
        .objects
        .iter()
        .map(|o| format!("{}:{:.4},{:.4},{:.4}", o.name, o.pose.x, o.pose.y, o.pose.z))
        .collect::<Vec<_>>()
        .join(",");
    let progress = pipeline.progress();
    let progress = if progress.contacted.is_empty() {
        "-".to_string()
    } else {
        progress.contacted.iter().cloned().collect::<Vec<_>>().join(",")
    };

    let mut out = String::with_capacity(384);
    write!(
        out,
        "snapshot|t_ms={t_ms}|phase={phase}|mode={mode}|awaiting={}|watchdog={}|delta={delta}",
        session.awaiting_command(),
        session.watchdog_expired(t_ms),
    )
    .unwrap();
    write!(
        out,
        "|base={:.4},{:.4},{:.4}|lift={:.4}|ext={:.4}|wrist={:.4},{:.4}|grip={:.4}",
        r.base_x, r.base_y, r.heading, r.lift, r.arm_ext, r.wrist_pitch, r.wrist_yaw, r.grip
    )
    .unwrap();
    write!(
        out,
        "|ee={:.4},{:.4},{:.4}|held={}|cmd={cmd}|objects={objects}|progress={progress}|done={}",
        ee.x,
        ee.y,
        ee.z,
        world.held_name().unwrap_or("-"),
        pipeline.success_at_ms().is_some()
    )
    .unwrap();
    out
}
