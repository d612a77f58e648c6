use hat_core::session::{EventOutcome, RejectReason};
use hat_core::{Actuator, ControlEvent, EventKind, Gating, Mode, OrientationSample, PipelineConfig, Session};
use proptest::prelude::*;

fn ev(t_ms: u32, kind: EventKind) -> ControlEvent {
    ControlEvent { t_ms, kind }
}

fn sample(seq: u32, t_ms: u32, roll: f32, pitch: f32) -> OrientationSample {
    OrientationSample::new(seq, t_ms, roll, pitch, 0.0)
}

fn started(gating: Gating) -> Session {
    let mut s = Session::new(PipelineConfig::default(), gating);
    s.ingest_sample(sample(0, 0, 0.0, 0.0));
    s.begin_listening();
    assert!(matches!(s.handle_event(&ev(0, EventKind::Start)), Ok(EventOutcome::Calibrated(_))));
    s
}

fn switch(s: &mut Session, kind: EventKind) -> EventOutcome {
    s.begin_listening();
    s.handle_event(&ev(0, kind)).unwrap()
}

#[test]
fn strict_tokens_need_a_listening_window() {
    let mut s = Session::new(PipelineConfig::default(), Gating::Strict);
    s.ingest_sample(sample(0, 0, 0.0, 0.0));
    assert_eq!(s.handle_event(&ev(0, EventKind::Start)), Ok(EventOutcome::Rejected(RejectReason::NotListening)));
    assert!(!s.is_calibrated());
    s.begin_listening();
    assert!(s.awaiting_command());
    assert!(s.handle_event(&ev(0, EventKind::Start)).unwrap().accepted());
    assert!(!s.awaiting_command());
    assert_eq!(s.mode(), Some(Mode::Drive));
}

#[test]
fn switches_before_start_are_refused() {
    let mut s = Session::new(PipelineConfig::default(), Gating::Trusted);
    s.ingest_sample(sample(0, 0, 0.0, 0.0));
    let out = s.handle_event(&ev(0, EventKind::SwitchArm)).unwrap();
    assert_eq!(out, EventOutcome::Rejected(RejectReason::NotCalibrated));
    assert_eq!(out.confirmation(EventKind::SwitchArm), "repeat");
}

#[test]
fn start_without_samples_is_an_error() {
    let mut s = Session::new(PipelineConfig::default(), Gating::Trusted);
    assert!(s.handle_event(&ev(0, EventKind::Start)).is_err());
}

#[test]
fn unrecognized_asks_for_repeat() {
    let mut s = started(Gating::Strict);
    let out = switch(&mut s, EventKind::Unrecognized);
    assert_eq!(out, EventOutcome::Repeat);
    assert_eq!(out.confirmation(EventKind::Unrecognized), "repeat");
    assert_eq!(s.mode(), Some(Mode::Drive));
}

#[test]
fn per_mode_dispatch() {
    let cfg = PipelineConfig::default();
    let cases = [
        (Mode::Drive, 60.0, 0.0, Actuator::BaseRotate, 0.5),
        (Mode::Drive, 0.0, 60.0, Actuator::BaseTranslate, 0.3),
        (Mode::Arm, 60.0, 0.0, Actuator::ArmExtend, 0.1),
        (Mode::Arm, 0.0, 60.0, Actuator::Lift, -0.1),
        (Mode::Wrist, -60.0, 0.0, Actuator::WristYaw, -0.8),
        (Mode::Wrist, 0.0, 60.0, Actuator::WristPitch, 0.8),
        (Mode::Gripper, 0.0, -60.0, Actuator::Gripper, -1.0),
        (Mode::Gripper, 0.0, 60.0, Actuator::Gripper, 1.0),
    ];
    for (mode, roll, pitch, act, want) in cases {
        let mut s = started(Gating::Trusted);
        s.handle_event(&ev(0, mode_token(mode))).unwrap();
        s.ingest_sample(sample(1, 50, roll, pitch));
        let f = s.tick(100);
        assert_eq!(f.get(act), want, "{mode} {roll} {pitch}");
        assert_eq!(f.velocities.len(), 1, "{mode}: {f:?}");
        assert_eq!(want.abs(), cfg.v_max(act));
    }
}

#[test]
fn gripper_ignores_roll() {
    let mut s = started(Gating::Trusted);
    s.handle_event(&ev(0, EventKind::SwitchGripper)).unwrap();
    s.ingest_sample(sample(1, 50, 60.0, 0.0));
    assert!(s.tick(100).is_stop());
}

#[test]
fn watchdog_stops_after_silence() {
    let mut s = started(Gating::Trusted);
    s.ingest_sample(sample(1, 1000, 0.0, 60.0));
    assert!(!s.tick(1300).is_stop());
    assert!(s.tick(1301).is_stop());
    s.ingest_sample(sample(2, 1400, 0.0, 60.0));
    assert!(!s.tick(1500).is_stop());
}

#[test]
fn listening_window_holds_the_robot() {
    let mut s = started(Gating::Strict);
    s.ingest_sample(sample(1, 50, 0.0, 60.0));
    assert!(!s.tick(100).is_stop());
    s.begin_listening();
    assert!(s.tick(100).is_stop());
    s.handle_event(&ev(100, EventKind::SwitchDrive)).unwrap();
    assert!(!s.tick(100).is_stop());
}

fn mode_token(mode: Mode) -> EventKind {
    match mode {
        Mode::Drive => EventKind::SwitchDrive,
        Mode::Arm => EventKind::SwitchArm,
        Mode::Wrist => EventKind::SwitchWrist,
        Mode::Gripper => EventKind::SwitchGripper,
    }
}

fn any_mode() -> impl Strategy<Value = Mode> {
    prop::sample::select(Mode::ALL.to_vec())
}

fn any_kind() -> impl Strategy<Value = EventKind> {
    prop::sample::select(EventKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn switching_twice_is_switching_once(start in any_mode(), target in any_mode()) {
        let mut s = started(Gating::Trusted);
        switch(&mut s, mode_token(start));
        switch(&mut s, mode_token(target));
        let once = s.phase();
        switch(&mut s, mode_token(target));
        prop_assert_eq!(s.phase(), once);
        prop_assert_eq!(s.mode(), Some(target));
    }

    #[test]
    fn frames_only_touch_the_active_mode(
        kinds in prop::collection::vec(any_kind(), 0..12),
        roll in -180.0f32..180.0,
        pitch in -180.0f32..180.0,
    ) {
        let mut s = started(Gating::Trusted);
        for k in kinds {
            let _ = s.handle_event(&ev(0, k));
        }
        s.ingest_sample(sample(1, 50, roll, pitch));
        let mode = s.mode().unwrap();
        let f = s.tick(100);
        for (a, v) in &f.velocities {
            prop_assert!(mode.owns(*a), "{} drove {}", mode, a);
            prop_assert!(v.abs() <= s.config().v_max(*a));
        }
    }

    #[test]
    fn uncalibrated_sessions_never_move(
        kinds in prop::collection::vec(prop::sample::select(vec![
            EventKind::SwitchDrive, EventKind::SwitchArm, EventKind::SwitchWrist,
            EventKind::SwitchGripper, EventKind::Unrecognized,
        ]), 0..12),
        roll in -180.0f32..180.0,
        pitch in -180.0f32..180.0,
    ) {
        let mut s = Session::new(PipelineConfig::default(), Gating::Trusted);
        s.ingest_sample(sample(0, 0, roll, pitch));
        for k in kinds {
            let _ = s.handle_event(&ev(0, k));
        }
        prop_assert!(!s.is_calibrated());
        prop_assert!(s.tick(100).is_stop());
    }
}
