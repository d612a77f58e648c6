//! Runs a head-pose script against a bundled scenario and prints the robot
//! and object state once per simulated second.
//!
//! ```text
//! cargo run -p hat-core --example timeline -- cup path/to/cup.script
//! ```

use std::env;
use std::fs;
use std::process::ExitCode;

use hat_core::scenario::Scenario;
use hat_core::script::Script;
use hat_core::session::Gating;
use hat_core::sim::end_effector_pose;
use hat_core::trace::TraceHeader;
use hat_core::{Pipeline, PipelineConfig};

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    let [scenario, script] = args.as_slice() else {
        eprintln!("usage: timeline <scenario> <script>");
        return ExitCode::FAILURE;
    };
    let scenario = match Scenario::load(scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let text = fs::read_to_string(script).expect("readable script");
    let script = Script::parse(&text).expect("valid script");
    let cfg = PipelineConfig::default();
    let header = TraceHeader { scenario: scenario.id, cfg_hash: cfg.hash_hex(), start_unix_ms: None };
    let trace = script.to_trace(header);

    let mut pipeline = Pipeline::new(cfg.clone(), scenario, Gating::Trusted);
    let mut next_print = 0;
    for record in &trace.records {
        for tick in pipeline.push(*record).ticks {
            if tick.t_ms >= next_print || tick.step.attached.is_some() || tick.step.released.is_some() {
                let w = pipeline.world();
                let r = &w.robot;
                let ee = end_effector_pose(r, pipeline.simulator().limits()).position;
                let objects: Vec<String> = w
                    .objects
                    .iter()
                    .filter(|o| o.attachable)
                    .map(|o| format!("{}=({:.3},{:.3},{:.3})", o.name, o.pose.x, o.pose.y, o.pose.z))
                    .collect();
                println!(
                    "t={:>6.1} mode={:<8} base=({:.3},{:.3},{:.3}) lift={:.2} ext={:.2} grip={:.2} ee=({:.3},{:.3},{:.3}) held={:?} {}{}",
                    f64::from(tick.t_ms) / 1000.0,
                    pipeline.session().mode().map_or("-", |m| m.as_str()),
                    r.base_x,
                    r.base_y,
                    r.heading,
                    r.lift,
                    r.arm_ext,
                    r.grip,
                    ee.x,
                    ee.y,
                    ee.z,
                    w.held_name(),
                    objects.join(" "),
                    if tick.succeeded { " SUCCESS" } else { "" },
                );
                next_print = tick.t_ms + 1000;
            }
        }
    }
    pipeline.advance_to(trace.end_ms() + cfg.watchdog_ms + 100);
    print!("{}", pipeline.metrics().to_kv());
    ExitCode::SUCCESS
}
