//! Angle wrapping helpers shared by the decoder and the mapping.

/// Wraps an angle in degrees into the half-open interval (-180, 180].
///
/// Values already in range are returned untouched so that encoding followed
/// by decoding is bit-exact (including `-0.0`).
pub fn wrap_deg(theta: f64) -> f64 {
    if theta > -180.0 && theta <= 180.0 {
        return theta;
    }
    // rem_euclid is exact, so huge inputs still land in range
    let r = theta.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Single-precision variant used on wire values.
///
/// Narrowing back to `f32` can round a value just above -180 onto -180
/// itself, which is folded to +180.
pub fn wrap_deg_f32(theta: f32) -> f32 {
    if theta > -180.0 && theta <= 180.0 {
        return theta;
    }
    let r = wrap_deg(f64::from(theta)) as f32;
    if r <= -180.0 {
        180.0
    } else {
        r
    }
}

/// Signed minimal difference `theta - reference`, wrapped into (-180, 180].
pub fn delta_deg(theta: f64, reference: f64) -> f64 {
    wrap_deg(theta - reference)
}
