//! Session, simulator and scenario driven together on the 10 Hz tick.
//!
//! Inputs (samples, command tokens, environment resets) are stamped in
//! milliseconds since the run began. Ticks fire at every multiple of
//! [`TICK_MS`]. An input stamped `t` is applied after every tick at or before
//! `t`, so a tick at `T` sees inputs from strictly before `T`. Live sessions,
//! replays and scripted runs all go through [`Pipeline::push`], which is what
//! makes a recording replay to the same result.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::config::PipelineConfig;
use crate::mapping::Actuator;
use crate::protocol::{ControlEvent, EventKind, OrientationSample, StreamReader};
use crate::scenario::{check_success, Scenario, TaskProgress};
use crate::session::{CommandFrame, EventOutcome, Gating, RejectReason, Session, SessionError};
use crate::sim::{Simulator, StepReport, World};
use crate::script::Script;
use crate::trace::{quantize_sample, Record, Trace, TraceError, TraceHeader};

pub const TICK_MS: u32 = 100;
const TICK_S: f64 = TICK_MS as f64 / 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TaskMetrics {
    /// First success time, or the time limit when unfinished.
    pub task_time_s: f64,
    pub completed: bool,
    pub mode_switches: u32,
    pub resets: u32,
    /// Integral of |BaseTranslate| over commanded ticks, meters.
    pub commanded_distance: f64,
    /// Share of ticks that commanded any motion, over the ticks up to one
    /// watchdog period plus one tick past the last input.
    pub nonzero_command_fraction: f64,
}

impl TaskMetrics {
    /// One `key=value` pair per line.
    pub fn to_kv(&self) -> String {
        format!(
            "task_time_s={}\ncompleted={}\nmode_switches={}\nresets={}\ncommanded_distance={}\nnonzero_command_fraction={}\n",
            self.task_time_s,
            self.completed,
            self.mode_switches,
            self.resets,
            self.commanded_distance,
            self.nonzero_command_fraction
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub t_ms: u32,
    pub frame: CommandFrame,
    pub step: StepReport,
    /// Set on the tick where the task first succeeded.
    pub succeeded: bool,
}

/// Effect of one input on the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Applied {
    Sample { shake_detected: bool },
    Event { kind: EventKind, outcome: Result<EventOutcome, SessionError> },
    Reset,
    /// Stale sample, dropped by the stream reader.
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pushed {
    pub ticks: Vec<TickReport>,
    pub applied: Applied,
    /// The record as it should appear in a recording, if it had any effect.
    pub record: Option<Record>,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    session: Session,
    sim: Simulator,
    scenario: Scenario,
    world: World,
    progress: TaskProgress,
    stream: StreamReader,
    next_tick_ms: u32,
    last_input_ms: u32,
    time_limit_ms: u32,
    ticks: u64,
    nonzero_ticks: u64,
    mode_switches: u32,
    resets: u32,
    commanded_distance: f64,
    success_at_ms: Option<u32>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, scenario: Scenario, gating: Gating) -> Self {
        let sim = Simulator::from_config(&cfg);
        let world = scenario.world();
        let time_limit_ms = (scenario.time_limit_s * 1000.0).round() as u32;
        Self {
            session: Session::new(cfg, gating),
            sim,
            scenario,
            world,
            progress: TaskProgress::default(),
            stream: StreamReader::new(),
            next_tick_ms: 0,
            last_input_ms: 0,
            time_limit_ms,
            ticks: 0,
            nonzero_ticks: 0,
            mode_switches: 0,
            resets: 0,
            commanded_distance: 0.0,
            success_at_ms: None,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn progress(&self) -> &TaskProgress {
        &self.progress
    }

    pub fn success_at_ms(&self) -> Option<u32> {
        self.success_at_ms
    }

    pub fn time_limit_ms(&self) -> u32 {
        self.time_limit_ms
    }

    /// Time the robot state corresponds to (end of the last tick).
    pub fn sim_time_ms(&self) -> u32 {
        self.next_tick_ms
    }

    fn tick_once(&mut self) -> TickReport {
        let t = self.next_tick_ms;
        let frame = self.session.tick(t);
        let step = self
            .sim
            .step(&mut self.world, &frame, TICK_S)
            .expect("session frames are finite and dt is positive");
        self.ticks += 1;
        if !frame.is_stop() {
            self.nonzero_ticks += 1;
        }
        self.commanded_distance += frame.get(Actuator::BaseTranslate).abs() * TICK_S;
        self.progress.update(&self.scenario, &self.world);
        self.next_tick_ms = t + TICK_MS;
        let succeeded = self.success_at_ms.is_none() && check_success(&self.scenario, &self.world, &self.progress);
        if succeeded {
            self.success_at_ms = Some(self.next_tick_ms);
        }
        TickReport { t_ms: t, frame, step, succeeded }
    }

    /// Runs every tick scheduled at or before `t_ms` that falls inside the
    /// time limit.
    pub fn advance_to(&mut self, t_ms: u32) -> Vec<TickReport> {
        let mut out = Vec::new();
        while self.next_tick_ms <= t_ms && self.next_tick_ms < self.time_limit_ms {
            out.push(self.tick_once());
        }
        out
    }

    /// Applies one input, first running any ticks due before it.
    ///
    /// Inputs must arrive in non-decreasing time order; an input stamped
    /// earlier than the previous one is treated as arriving at the previous
    /// time.
    pub fn push(&mut self, record: Record) -> Pushed {
        let t = record.t_ms().max(self.last_input_ms);
        self.last_input_ms = t;
        let ticks = self.advance_to(t);
        let (applied, record) = match record {
            Record::Sample(s) => {
                let s = quantize_sample(OrientationSample { t_ms: t, ..s });
                match self.stream.accept(s) {
                    None => (Applied::Dropped, None),
                    Some(s) => {
                        let shake_detected = self.session.ingest_sample(s);
                        (Applied::Sample { shake_detected }, Some(Record::Sample(s)))
                    }
                }
            }
            Record::Event(e) => {
                let e = ControlEvent { t_ms: t, ..e };
                let outcome = self.session.handle_event(&e);
                if matches!(outcome, Ok(EventOutcome::Switched { .. })) {
                    self.mode_switches += 1;
                }
                let keep = !matches!(outcome, Ok(EventOutcome::Rejected(RejectReason::NotListening)));
                (Applied::Event { kind: e.kind, outcome }, keep.then_some(Record::Event(e)))
            }
            Record::Reset { .. } => {
                self.world = self.scenario.world();
                self.progress = TaskProgress::default();
                self.resets += 1;
                (Applied::Reset, Some(Record::Reset { t_ms: t }))
            }
        };
        Pushed { ticks, applied, record }
    }

    /// Ticks that fall inside the active window. Later ticks are stop frames
    /// (the watchdog has expired), so a live session that idles before
    /// disconnecting reports the same metrics as the replay of its recording.
    fn counted_ticks(&self) -> u64 {
        let horizon = self.last_input_ms.saturating_add(self.session.config().watchdog_ms + TICK_MS);
        self.ticks.min(u64::from(horizon / TICK_MS) + 1)
    }

    pub fn metrics(&self) -> TaskMetrics {
        let counted = self.counted_ticks();
        TaskMetrics {
            task_time_s: match self.success_at_ms {
                Some(ms) => f64::from(ms) / 1000.0,
                None => self.scenario.time_limit_s,
            },
            completed: self.success_at_ms.is_some(),
            mode_switches: self.mode_switches,
            resets: self.resets,
            commanded_distance: self.commanded_distance,
            nonzero_command_fraction: if counted == 0 {
                0.0
            } else {
                self.nonzero_ticks as f64 / counted as f64
            },
        }
    }

    /// Actuators of the current mode currently resting on a limit.
    pub fn joints_at_limit(&self) -> BTreeSet<Actuator> {
        let limits = self.sim.limits();
        Actuator::ALL
            .into_iter()
            .filter(|a| match (self.world.robot.joint(*a), limits.range(*a)) {
                (Some(q), Some((lo, hi))) => q == lo || q == hi,
                _ => false,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub metrics: TaskMetrics,
    pub world: World,
    /// The trace was recorded under a different pipeline config.
    pub config_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Feeds a trace through a fresh pipeline with trusted gating.
///
/// Ticks continue until one watchdog period plus one tick past the last
/// record (the robot has stopped by then), capped at the time limit.
pub fn replay(trace: &Trace, scenario: &Scenario, cfg: &PipelineConfig) -> Result<ReplayOutcome, ReplayError> {
    for (i, pair) in trace.records.windows(2).enumerate() {
        if pair[1].t_ms() < pair[0].t_ms() {
            return Err(TraceError::CorruptTrace { line: i + 3, reason: "records out of time order".into() }.into());
        }
    }
    let config_mismatch = trace.header.as_ref().is_some_and(|h| h.cfg_hash != cfg.hash_hex());
    if config_mismatch {
        log::warn!("trace was recorded under a different configuration; replaying with the current one");
    }
    let mut pipeline = Pipeline::new(cfg.clone(), scenario.clone(), Gating::Trusted);
    for r in &trace.records {
        pipeline.push(*r);
    }
    if !trace.records.is_empty() {
        pipeline.advance_to(trace.end_ms().saturating_add(cfg.watchdog_ms + TICK_MS));
    }
    Ok(ReplayOutcome { metrics: pipeline.metrics(), world: pipeline.world, config_mismatch })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub metrics: TaskMetrics,
    pub world: World,
    /// Everything the run consumed, ready to be written out and replayed.
    pub recording: Trace,
}

/// Runs a script headlessly with trusted gating and records it.
pub fn simulate(script: &Script, scenario: &Scenario, cfg: &PipelineConfig) -> SimulateOutcome {
    let header = TraceHeader { scenario: scenario.id, cfg_hash: cfg.hash_hex(), start_unix_ms: None };
    let inputs = script.to_trace(header.clone());
    let mut recording = Trace::new(header);
    let mut pipeline = Pipeline::new(cfg.clone(), scenario.clone(), Gating::Trusted);
    for r in inputs.records {
        if let Some(kept) = pipeline.push(r).record {
            recording.records.push(kept);
        }
    }
    if !recording.records.is_empty() {
        pipeline.advance_to(recording.end_ms().saturating_add(cfg.watchdog_ms + TICK_MS));
    }
    SimulateOutcome { metrics: pipeline.metrics(), world: pipeline.world, recording }
}

pub fn compute_metrics(trace: &Trace, scenario: &Scenario, cfg: &PipelineConfig) -> Result<TaskMetrics, ReplayError> {
    replay(trace, scenario, cfg).map(|o| o.metrics)
}
