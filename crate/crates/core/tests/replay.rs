use hat_core::batch::{self, ReplayJob};
use hat_core::pipeline::{replay, simulate, ReplayError, TICK_MS};
use hat_core::scenario::{ScenarioError, SuccessPredicate};
use hat_core::script::Script;
use hat_core::trace::{TraceError, TraceHeader};
use hat_core::{expert, Gating, Pipeline, PipelineConfig, Record, Scenario, ScenarioId, Trace};

fn cfg() -> PipelineConfig {
    PipelineConfig::default()
}

fn header(id: ScenarioId) -> TraceHeader {
    TraceHeader { scenario: id, cfg_hash: cfg().hash_hex(), start_unix_ms: None }
}

fn run(id: ScenarioId, script: &str) -> hat_core::pipeline::SimulateOutcome {
    simulate(&Script::parse(script).unwrap(), &Scenario::bundled(id), &cfg())
}

#[test]
fn every_expert_run_completes_in_time() {
    for id in ScenarioId::ALL {
        let scenario = Scenario::bundled(id);
        let out = replay(&expert::trace(id), &scenario, &cfg()).unwrap();
        assert!(out.metrics.completed, "{id}");
        assert!(out.metrics.task_time_s < scenario.time_limit_s, "{id}");
        assert!(!out.config_mismatch, "{id}");
    }
}

#[test]
fn cup_run_uses_mode_switches() {
    let out = replay(&expert::trace(ScenarioId::Cup), &Scenario::bundled(ScenarioId::Cup), &cfg()).unwrap();
    assert!(out.metrics.mode_switches >= 2);
}

#[test]
fn replay_is_bit_for_bit_repeatable() {
    for id in ScenarioId::ALL {
        let a = replay(&expert::trace(id), &Scenario::bundled(id), &cfg()).unwrap();
        let b = replay(&expert::trace(id), &Scenario::bundled(id), &cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.metrics.to_kv(), b.metrics.to_kv());
    }
}

#[test]
fn foreign_config_is_flagged() {
    let mut other = cfg();
    other.watchdog_ms = 250;
    let out = replay(&expert::trace(ScenarioId::Trash), &Scenario::bundled(ScenarioId::Trash), &other).unwrap();
    assert!(out.config_mismatch);
}

#[test]
fn out_of_order_records_are_corrupt() {
    let mut trace = expert::trace(ScenarioId::Cup);
    trace.records.swap(3, 30);
    let err = replay(&trace, &Scenario::bundled(ScenarioId::Cup), &cfg()).unwrap_err();
    assert!(matches!(err, ReplayError::Trace(TraceError::CorruptTrace { .. })));
}

#[test]
fn empty_trace_times_out() {
    let trace = Trace::new(header(ScenarioId::Cup));
    let out = replay(&trace, &Scenario::bundled(ScenarioId::Cup), &cfg()).unwrap();
    assert!(!out.metrics.completed);
    assert_eq!(out.metrics.task_time_s, 840.0);
    assert_eq!(out.metrics.nonzero_command_fraction, 0.0);
}

#[test]
fn held_pose_step_gives_one_tick_per_hundred_ms() {
    let out = run(ScenarioId::Practice, "pose 0 0 0 0\nevent 0 start\nhold 1\npose 1 0 60 0\nhold 2\npose 2 0 0 0\nhold 3\n");
    assert!((out.metrics.commanded_distance - 0.3).abs() < 1e-9);
    assert!((out.world.robot.base_x - 0.3).abs() < 1e-9);
}

#[test]
fn resets_restore_the_world_but_not_the_clock() {
    let script = "pose 0 0 0 0\nevent 0 start\nhold 1\npose 1 0 60 0\nhold 2\npose 2 0 0 0\nreset 2.5\nreset 3\nhold 4\n";
    let out = run(ScenarioId::Practice, script);
    assert_eq!(out.metrics.resets, 2);
    assert_eq!(out.world, Scenario::bundled(ScenarioId::Practice).world());
    assert!((out.metrics.commanded_distance - 0.3).abs() < 1e-9);
}

#[test]
fn success_latches() {
    let id = ScenarioId::Cup;
    let scenario = Scenario::bundled(id);
    let trace = expert::trace(id);
    let done = replay(&trace, &scenario, &cfg()).unwrap().metrics.task_time_s;
    let mut p = Pipeline::new(cfg(), scenario.clone(), Gating::Trusted);
    for r in &trace.records {
        p.push(*r);
    }
    let end = trace.end_ms();
    p.push(Record::Reset { t_ms: end + TICK_MS });
    p.advance_to(end + 10 * TICK_MS);
    let m = p.metrics();
    assert!(m.completed);
    assert_eq!(m.task_time_s, done);
    assert_eq!(m.resets, 1);
    let SuccessPredicate::PlaceInRegion { region, object } = &scenario.success else { panic!() };
    let i = p.world().object_index(object).unwrap();
    assert!(!region.contains(&p.world().objects[i].pose));
}

#[test]
fn live_style_recordings_replay_identically() {
    for id in ScenarioId::ALL {
        let out = simulate(&expert::script(id), &Scenario::bundled(id), &cfg());
        let again = replay(&out.recording, &Scenario::bundled(id), &cfg()).unwrap();
        assert_eq!(again.metrics, out.metrics, "{id}");
        assert_eq!(again.world, out.world, "{id}");
    }
}

#[test]
fn batch_forms_agree() {
    let jobs: Vec<ReplayJob> = ScenarioId::ALL
        .into_iter()
        .map(|id| ReplayJob { trace: expert::trace(id), scenario: Scenario::bundled(id) })
        .collect();
    let seq = batch::replay_all_seq(&jobs, &cfg());
    assert_eq!(batch::replay_all(&jobs, &cfg()), seq);
    #[cfg(feature = "parallel")]
    assert_eq!(batch::replay_all_par(&jobs, &cfg()), seq);

    let seeds: Vec<u64> = (0..8).collect();
    let limits = cfg().robot;
    let sweep = batch::random_command_sweep_seq(&seeds, 500, &limits);
    assert!(sweep.iter().all(|s| s.limit_violations == 0));
    assert_eq!(batch::random_command_sweep(&seeds, 500, &limits), sweep);
}

#[test]
fn scenario_files_load_and_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, ScenarioId::Trash.bundled_source()).unwrap();
    assert_eq!(Scenario::load(good.to_str().unwrap()).unwrap(), Scenario::bundled(ScenarioId::Trash));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "id = \"cup\"\nobjects = []\n").unwrap();
    assert!(matches!(Scenario::load(bad.to_str().unwrap()), Err(ScenarioError::MalformedScenario { .. })));
    assert!(matches!(Scenario::load("/nonexistent/scenario.toml"), Err(ScenarioError::Io(_))));
    assert_eq!(Scenario::load("blanket").unwrap().id, ScenarioId::Blanket);
}
