use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hat_core::scenario::ScenarioId;

fn core_asset(parts: &[&str]) -> PathBuf {
    let mut p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "assets"].iter().collect();
    p.extend(parts);
    p
}

fn hat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hat"))
        .args(args)
        .env_remove("HAT_CONFIG")
        .env_remove("HAT_LISTEN")
        .env("RUST_LOG", "off")
        .output()
        .expect("hat runs")
}

fn kv(out: &Output) -> Vec<(String, String)> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap_or_else(|| panic!("not key=value: {l}"));
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn get(out: &Output, key: &str) -> String {
    kv(out).into_iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bundled_traces_replay_to_completion() {
    for id in ScenarioId::ALL {
        let trace = core_asset(&["traces", &format!("{id}.trace")]);
        let out = hat(&["replay", path_str(&trace)]);
        assert_eq!(out.status.code(), Some(0), "{id}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(get(&out, "completed"), "true");
        assert!(get(&out, "task_time_s").parse::<f64>().unwrap() < 840.0);
        let keys: Vec<String> = kv(&out).into_iter().map(|(k, _)| k).collect();
        assert_eq!(
            keys,
            ["task_time_s", "completed", "mode_switches", "resets", "commanded_distance", "nonzero_command_fraction"]
        );
    }
    let cup = hat(&["replay", path_str(&core_asset(&["traces", "cup.trace"]))]);
    assert!(get(&cup, "mode_switches").parse::<u32>().unwrap() >= 2);
}

#[test]
fn empty_trace_runs_out_the_clock() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.trace");
    fs::write(&empty, "").unwrap();
    let out = hat(&["replay", path_str(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(get(&out, "task_time_s"), "840");
    assert_eq!(get(&out, "completed"), "false");
    // metrics reports without gating the exit code
    assert_eq!(hat(&["metrics", path_str(&empty)]).status.code(), Some(0));
}

#[test]
fn bad_input_fails_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.trace");
    let out = hat(&["replay", path_str(&missing)]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.trace"));

    let corrupt = dir.path().join("corrupt.trace");
    let good = fs::read_to_string(core_asset(&["traces", "cup.trace"])).unwrap();
    let mut lines: Vec<&str> = good.lines().collect();
    lines.swap(5, 40);
    fs::write(&corrupt, lines.join("\n")).unwrap();
    let out = hat(&["replay", path_str(&corrupt)]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn simulate_emits_a_replayable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("blanket.trace");
    let script = core_asset(&["scripts", "blanket.script"]);
    let sim = hat(&["simulate", "--scenario", "blanket", "--script", path_str(&script), "--emit-trace", path_str(&emitted)]);
    assert_eq!(sim.status.code(), Some(0));
    let bundled = fs::read_to_string(core_asset(&["traces", "blanket.trace"])).unwrap();
    assert_eq!(fs::read_to_string(&emitted).unwrap(), bundled);
    let rep = hat(&["replay", path_str(&emitted)]);
    assert_eq!(rep.stdout, sim.stdout);
}

#[test]
fn holding_pitch_in_drive_covers_the_mapped_distance() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("hold.script");
    fs::write(&script, "pose 0 0 0 0\nevent 0 start\nhold 1\npose 1 0 30 0\nhold 3\npose 3 0 0 0\nhold 4\n").unwrap();
    let out = hat(&["simulate", "--scenario", "practice", "--script", path_str(&script)]);
    assert_eq!(out.status.code(), Some(1));
    let d: f64 = get(&out, "commanded_distance").parse().unwrap();
    assert!((d - 0.3).abs() < 1e-9, "{d}");
}

#[test]
fn script_without_start_never_moves() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("nostart.script");
    fs::write(&script, "pose 0 0 60 0\npose 5 60 -60 0\nevent 1 switch to arm\n").unwrap();
    let out = hat(&["simulate", "--scenario", "cup", "--script", path_str(&script)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(get(&out, "commanded_distance"), "0");
    assert_eq!(get(&out, "nonzero_command_fraction"), "0");
    assert_eq!(get(&out, "completed"), "false");
}

#[test]
fn malformed_script_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("bad.script");
    fs::write(&script, "pose 0 0 0 0\nwiggle 1\n").unwrap();
    let out = hat(&["simulate", "--scenario", "cup", "--script", path_str(&script)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn config_file_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("slow.toml");
    fs::write(&cfg, "[actuators.base_translate]\nv_max = 0.1\n").unwrap();
    let script = dir.path().join("hold.script");
    fs::write(&script, "pose 0 0 0 0\nevent 0 start\nhold 1\npose 1 0 60 0\nhold 3\npose 3 0 0 0\nhold 4\n").unwrap();
    let out = hat(&["simulate", "--scenario", "practice", "--script", path_str(&script), "--config", path_str(&cfg)]);
    let d: f64 = get(&out, "commanded_distance").parse().unwrap();
    assert!((d - 0.2).abs() < 1e-9, "{d}");

    let via_env = Command::new(env!("CARGO_BIN_EXE_hat"))
        .args(["simulate", "--scenario", "practice", "--script", path_str(&script)])
        .env("HAT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, out.stdout);

    // replaying a trace recorded under the defaults warns about the mismatch
    let warned = hat(&["metrics", path_str(&core_asset(&["traces", "cup.trace"])), "--config", path_str(&cfg)]);
    assert!(String::from_utf8_lossy(&warned.stderr).contains("different configuration"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[thresholds.pitch]\nlow_pos = 90.0\n").unwrap();
    assert_eq!(hat(&["metrics", "x.trace", "--config", path_str(&bad)]).status.code(), Some(2));
}
