use hat_core::mapping::{axis_velocity, calibrate, in_deadzone, normalize_delta, MappingError};
use hat_core::{Actuator, ActuatorParams, AxisThresholds, CalibrationState, OrientationSample};
use proptest::prelude::*;

fn drive(v_max: f64) -> ActuatorParams {
    ActuatorParams::continuous(Actuator::BaseTranslate, v_max, &AxisThresholds::default())
}

fn v(theta: f64, theta_c: f64) -> f64 {
    axis_velocity(theta, theta_c, &AxisThresholds::default(), &drive(0.3)).value()
}

/// Shortest signed angle via atan2, then a saturating ramp scaled by the
/// fraction of the 15..45 band covered.
fn oracle(theta: f64, theta_c: f64, v_max: f64) -> f64 {
    let r = (theta - theta_c).to_radians();
    let d = r.sin().atan2(r.cos()).to_degrees();
    let frac = ((d.abs() - 15.0) / 30.0).clamp(0.0, 1.0);
    d.signum() * frac * v_max
}

#[test]
fn delta_takes_the_short_way_round() {
    assert_eq!(normalize_delta(-175.0, 170.0), 15.0);
    assert_eq!(normalize_delta(175.0, -170.0), -15.0);
    assert_eq!(normalize_delta(10.0, -10.0), 20.0);
}

#[test]
fn ramp_examples() {
    assert_eq!(v(0.0, 0.0), 0.0);
    assert_eq!(v(15.0, 0.0), 0.0);
    assert!((v(30.0, 0.0) - 0.15).abs() < 1e-12);
    assert!((v(-30.0, 0.0) + 0.15).abs() < 1e-12);
    assert_eq!(v(45.0, 0.0), 0.3);
    assert_eq!(v(60.0, 0.0), 0.3);
    assert_eq!(v(-90.0, 0.0), -0.3);
    assert!((v(-175.0, 170.0)).abs() < 1e-12);
    assert!((v(-145.0, 170.0) - 0.3).abs() < 1e-12);
}

#[test]
fn default_gain_spans_the_ramp() {
    let p = drive(0.3);
    assert!((p.k - 0.01).abs() < 1e-15);
}

#[test]
fn calibration_needs_a_sample() {
    assert_eq!(calibrate(None), Err(MappingError::NoSampleYet));
    let s = OrientationSample::new(3, 150, 4.0, -7.5, 90.0);
    let cal = calibrate(Some(&s)).unwrap();
    assert_eq!(cal, CalibrationState { theta_c_roll: 4.0, theta_c_pitch: -7.5 });
}

#[test]
fn calibrated_wrap_example() {
    let cal = calibrate(Some(&OrientationSample::new(0, 0, 170.0, 0.0, 0.0))).unwrap();
    let thr = AxisThresholds::default();
    assert!(!in_deadzone(-175.0, 0.0, &cal, &thr, &thr));
    assert!(in_deadzone(-176.0, 0.0, &cal, &thr, &thr));
    assert!(in_deadzone(179.0, 14.9, &cal, &thr, &thr));
    assert!(!in_deadzone(179.0, -15.0, &cal, &thr, &thr));
}

#[test]
fn unordered_thresholds_are_rejected() {
    let bad = AxisThresholds { low_pos: 15.0, high_pos: 10.0, low_neg: -15.0, high_neg: -45.0 };
    assert!(bad.validate().is_err());
    assert!(AxisThresholds::default().validate().is_ok());
}

fn away_from_seam() -> impl Strategy<Value = (f64, f64)> {
    (-180.0f64..180.0, -180.0f64..180.0).prop_filter("seam", |(t, c)| {
        let d = normalize_delta(*t, *c);
        d.abs() < 179.9
    })
}

proptest! {
    #[test]
    fn matches_the_oracle((theta, theta_c) in away_from_seam(), v_max in 0.01f64..2.0) {
        let got = axis_velocity(theta, theta_c, &AxisThresholds::default(), &drive(v_max)).value();
        prop_assert!((got - oracle(theta, theta_c, v_max)).abs() < 1e-9 * v_max.max(1.0));
    }

    #[test]
    fn deadzone_means_exactly_zero((theta, theta_c) in away_from_seam()) {
        let d = normalize_delta(theta, theta_c);
        let got = v(theta, theta_c);
        if d.abs() < 15.0 {
            prop_assert_eq!(got, 0.0);
        }
        prop_assert!(got.abs() <= 0.3);
    }

    #[test]
    fn odd_symmetry(d in -179.0f64..179.0) {
        prop_assert_eq!(v(d, 0.0), -v(-d, 0.0));
    }

    #[test]
    fn delta_is_normalized(theta in -1e6f64..1e6, theta_c in -1e6f64..1e6) {
        let d = normalize_delta(theta, theta_c);
        prop_assert!((-180.0..=180.0).contains(&d));
    }
}
