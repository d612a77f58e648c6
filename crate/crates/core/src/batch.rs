//! Data-parallel sweeps: angle grids through the mapping, many trace
//! replays, and randomized command streams through the simulator.
//!
//! Every operation has a sequential form (`*_seq`) that is always compiled.
//! With the `parallel` feature (default) a rayon form (`*_par`) is available
//! and the unsuffixed entry point uses it; without the feature the entry
//! point falls back to the sequential form. Results are identical either
//! way; each item is computed independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::mapping::{axis_velocity, Actuator, ActuatorParams, AxisThresholds};
use crate::pipeline::{replay, ReplayError, ReplayOutcome};
use crate::scenario::Scenario;
use crate::session::CommandFrame;
use crate::sim::{RobotLimits, RobotState, Simulator};
use crate::trace::Trace;

pub fn map_angles_seq(angles: &[f64], theta_c: f64, thr: &AxisThresholds, params: &ActuatorParams) -> Vec<f64> {
    angles.iter().map(|a| axis_velocity(*a, theta_c, thr, params).value()).collect()
}

#[cfg(feature = "parallel")]
pub fn map_angles_par(angles: &[f64], theta_c: f64, thr: &AxisThresholds, params: &ActuatorParams) -> Vec<f64> {
    angles.par_iter().map(|a| axis_velocity(*a, theta_c, thr, params).value()).collect()
}

pub fn map_angles(angles: &[f64], theta_c: f64, thr: &AxisThresholds, params: &ActuatorParams) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        map_angles_par(angles, theta_c, thr, params)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_angles_seq(angles, theta_c, thr, params)
    }
}

#[derive(Debug, Clone)]
pub struct ReplayJob {
    pub trace: Trace,
    pub scenario: Scenario,
}

pub fn replay_all_seq(jobs: &[ReplayJob], cfg: &PipelineConfig) -> Vec<Result<ReplayOutcome, ReplayError>> {
    jobs.iter().map(|j| replay(&j.trace, &j.scenario, cfg)).collect()
}

#[cfg(feature = "parallel")]
pub fn replay_all_par(jobs: &[ReplayJob], cfg: &PipelineConfig) -> Vec<Result<ReplayOutcome, ReplayError>> {
    jobs.par_iter().map(|j| replay(&j.trace, &j.scenario, cfg)).collect()
}

pub fn replay_all(jobs: &[ReplayJob], cfg: &PipelineConfig) -> Vec<Result<ReplayOutcome, ReplayError>> {
    #[cfg(feature = "parallel")]
    {
        replay_all_par(jobs, cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replay_all_seq(jobs, cfg)
    }
}

/// Result of driving one seeded random command stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub seed: u64,
    pub steps: u64,
    /// Steps after which some joint was outside its limit interval.
    pub limit_violations: u64,
    pub final_state: RobotState,
}

/// Random frame: up to three actuators, velocities up to twice the cap in
/// either direction, including large overshoots.
pub fn random_frame(rng: &mut impl Rng) -> CommandFrame {
    let mut frame = CommandFrame::default();
    for _ in 0..rng.random_range(0..=3) {
        let a = Actuator::ALL[rng.random_range(0..Actuator::ALL.len())];
        let cap = a.default_v_max();
        frame.velocities.insert(a, rng.random_range(-2.0 * cap..=2.0 * cap));
    }
    frame
}

pub fn random_command_run(seed: u64, steps: u64, limits: &RobotLimits) -> SweepSummary {
    let sim = Simulator::new(*limits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = RobotState::home();
    let mut limit_violations = 0;
    for _ in 0..steps {
        let frame = random_frame(&mut rng);
        let dt = rng.random_range(0.01..=0.5);
        state = sim.step_robot(&state, &frame, dt).expect("finite frame, positive dt");
        if !state.within_limits(limits) {
            limit_violations += 1;
        }
    }
    SweepSummary { seed, steps, limit_violations, final_state: state }
}

pub fn random_command_sweep_seq(seeds: &[u64], steps: u64, limits: &RobotLimits) -> Vec<SweepSummary> {
    seeds.iter().map(|s| random_command_run(*s, steps, limits)).collect()
}

#[cfg(feature = "parallel")]
pub fn random_command_sweep_par(seeds: &[u64], steps: u64, limits: &RobotLimits) -> Vec<SweepSummary> {
    seeds.par_iter().map(|s| random_command_run(*s, steps, limits)).collect()
}

pub fn random_command_sweep(seeds: &[u64], steps: u64, limits: &RobotLimits) -> Vec<SweepSummary> {
    #[cfg(feature = "parallel")]
    {
        random_command_sweep_par(seeds, steps, limits)
    }
    #[cfg(not(feature = "parallel"))]
    {
        random_command_sweep_seq(seeds, steps, limits)
    }
}
