//! Orientation telemetry frames and control events.
//!
//! ## Wire format
//!
//! One orientation sample is exactly 20 bytes, little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  seq    u32, strictly increasing per stream
//!      4     4  t_ms   u32, milliseconds since stream start
//!      8     4  roll   f32 degrees
//!     12     4  pitch  f32 degrees
//!     16     4  yaw    f32 degrees
//! ```
//!
//! Angles are re-normalized into (-180, 180] on decode. Frames with a NaN or
//! infinite angle are rejected.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::angle::wrap_deg_f32;

/// Size of an encoded [`OrientationSample`].
pub const FRAME_LEN: usize = 20;

/// One fused head-orientation reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSample {
    pub seq: u32,
    pub t_ms: u32,
    pub roll: f32,
    pub pitch: f32,
    pub yaw: f32,
}

impl OrientationSample {
    /// Builds a sample with angles wrapped into (-180, 180].
    pub fn new(seq: u32, t_ms: u32, roll: f32, pitch: f32, yaw: f32) -> Self {
        Self {
            seq,
            t_ms,
            roll: wrap_deg_f32(roll),
            pitch: wrap_deg_f32(pitch),
            yaw: wrap_deg_f32(yaw),
        }
    }

    pub fn is_normalized(&self) -> bool {
        [self.roll, self.pitch, self.yaw]
            .iter()
            .all(|a| a.is_finite() && *a > -180.0 && *a <= 180.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("orientation frame must be {FRAME_LEN} bytes, got {0}")]
    WrongLength(usize),
    #[error("orientation frame carries a non-finite {0} angle")]
    NonFiniteAngle(&'static str),
}

pub fn encode_sample(sample: &OrientationSample) -> [u8; FRAME_LEN] {
    let mut out = [0u8; FRAME_LEN];
    out[0..4].copy_from_slice(&sample.seq.to_le_bytes());
    out[4..8].copy_from_slice(&sample.t_ms.to_le_bytes());
    out[8..12].copy_from_slice(&sample.roll.to_le_bytes());
    out[12..16].copy_from_slice(&sample.pitch.to_le_bytes());
    out[16..20].copy_from_slice(&sample.yaw.to_le_bytes());
    out
}

pub fn decode_sample(bytes: &[u8]) -> Result<OrientationSample, DecodeError> {
    let frame: &[u8; FRAME_LEN] = bytes
        .try_into()
        .map_err(|_| DecodeError::WrongLength(bytes.len()))?;
    let word = |at: usize| [frame[at], frame[at + 1], frame[at + 2], frame[at + 3]];
    let angle = |at: usize, name: &'static str| {
        let v = f32::from_le_bytes(word(at));
        if v.is_finite() {
            Ok(wrap_deg_f32(v))
        } else {
            Err(DecodeError::NonFiniteAngle(name))
        }
    };
    Ok(OrientationSample {
        seq: u32::from_le_bytes(word(0)),
        t_ms: u32::from_le_bytes(word(4)),
        roll: angle(8, "roll")?,
        pitch: angle(12, "pitch")?,
        yaw: angle(16, "yaw")?,
    })
}

/// Ordering of a sequence number relative to the previous accepted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqCheck {
    InOrder,
    /// Number of samples missing between the two.
    Gap(u32),
    Stale,
}

pub fn check_sequence(prev_seq: u32, next_seq: u32) -> SeqCheck {
    if next_seq <= prev_seq {
        SeqCheck::Stale
    } else if next_seq - prev_seq == 1 {
        SeqCheck::InOrder
    } else {
        SeqCheck::Gap(next_seq - prev_seq - 1)
    }
}

/// Single-consumer filter over one incoming sample stream.
///
/// Stale or duplicate samples are dropped; gaps are counted and the newer
/// sample is forwarded.
#[derive(Debug, Default, Clone)]
pub struct StreamReader {
    last_seq: Option<u32>,
    pub accepted: u64,
    pub dropped_stale: u64,
    pub missing: u64,
}

impl StreamReader {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the sample if it should be forwarded downstream.
    pub fn accept(&mut self, sample: OrientationSample) -> Option<OrientationSample> {
        if let Some(prev) = self.last_seq {
            match check_sequence(prev, sample.seq) {
                SeqCheck::Stale => {
                    self.dropped_stale += 1;
                    return None;
                }
                SeqCheck::Gap(n) => {
                    log::debug!("orientation stream gap: {n} samples missing before seq {}", sample.seq);
                    self.missing += u64::from(n);
                }
                SeqCheck::InOrder => {}
            }
        }
        self.last_seq = Some(sample.seq);
        self.accepted += 1;
        Some(sample)
    }

    pub fn last_seq(&self) -> Option<u32> {
        self.last_seq
    }
}

/// Recognized command tokens (stand-ins for the spoken phrases).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Start,
    SwitchDrive,
    SwitchArm,
    SwitchWrist,
    SwitchGripper,
    /// The recognizer could not identify the phrase; answered with "repeat".
    Unrecognized,
}

impl EventKind {
    pub const ALL: [EventKind; 6] = [
        EventKind::Start,
        EventKind::SwitchDrive,
        EventKind::SwitchArm,
        EventKind::SwitchWrist,
        EventKind::SwitchGripper,
        EventKind::Unrecognized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::SwitchDrive => "switch_drive",
            EventKind::SwitchArm => "switch_arm",
            EventKind::SwitchWrist => "switch_wrist",
            EventKind::SwitchGripper => "switch_gripper",
            EventKind::Unrecognized => "unrecognized",
        }
    }

    /// Interprets a free-form utterance. Anything that is not one of the
    /// known phrases becomes [`EventKind::Unrecognized`].
    pub fn from_phrase(phrase: &str) -> EventKind {
        let words: Vec<String> = phrase
            .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
            .filter(|w| !w.is_empty())
            .map(str::to_ascii_lowercase)
            .collect();
        let words: Vec<&str> = words.iter().map(String::as_str).collect();
        match words.as_slice() {
            ["start"] => EventKind::Start,
            ["switch", "to", m] | ["switch", m] => match *m {
                "drive" => EventKind::SwitchDrive,
                "arm" => EventKind::SwitchArm,
                "wrist" => EventKind::SwitchWrist,
                "gripper" => EventKind::SwitchGripper,
                _ => EventKind::Unrecognized,
            },
            _ => EventKind::Unrecognized,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown event kind `{0}`")]
pub struct UnknownEventKind(pub String);

impl FromStr for EventKind {
    type Err = UnknownEventKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownEventKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlEvent {
    pub t_ms: u32,
    pub kind: EventKind,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // independent of angle::wrap_deg: try every ±360 shift
    fn wrap_oracle(theta: f64) -> f64 {
        (-40..=40)
            .map(|k| theta + 360.0 * f64::from(k))
            .find(|c| *c > -180.0 && *c <= 180.0)
            .unwrap()
    }

    #[test]
    fn zero_sample_encodes_zero_angles() {
        let bytes = encode_sample(&OrientationSample::new(0, 0, 0.0, 0.0, 0.0));
        assert_eq!(bytes.len(), 20);
        assert!(bytes.iter().all(|b| *b == 0));
    }

    #[test]
    fn roll_fifteen_layout() {
        let bytes = encode_sample(&OrientationSample::new(1, 50, 15.0, 0.0, 0.0));
        assert_eq!(&bytes[0..4], &[1, 0, 0, 0]);
        assert_eq!(&bytes[4..8], &[50, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[0x00, 0x00, 0x70, 0x41]);
    }

    #[test]
    fn wrong_length() {
        assert_eq!(decode_sample(&[0u8; 19]), Err(DecodeError::WrongLength(19)));
        assert_eq!(decode_sample(&[0u8; 21]), Err(DecodeError::WrongLength(21)));
    }

    #[test]
    fn nan_roll_rejected() {
        let mut bytes = [0u8; 20];
        bytes[8..12].copy_from_slice(&f32::NAN.to_le_bytes());
        assert_eq!(decode_sample(&bytes), Err(DecodeError::NonFiniteAngle("roll")));
        bytes[8..12].copy_from_slice(&0f32.to_le_bytes());
        bytes[16..20].copy_from_slice(&f32::NEG_INFINITY.to_le_bytes());
        assert_eq!(decode_sample(&bytes), Err(DecodeError::NonFiniteAngle("yaw")));
    }

    #[test]
    fn decode_wraps_out_of_range_roll() {
        let mut bytes = [0u8; 20];
        bytes[8..12].copy_from_slice(&190f32.to_le_bytes());
        let s = decode_sample(&bytes).unwrap();
        assert_eq!(f64::from(s.roll), wrap_oracle(190.0));
        assert_eq!(s.roll, -170.0);
    }

    #[test]
    fn sequence_checks() {
        assert_eq!(check_sequence(5, 6), SeqCheck::InOrder);
        assert_eq!(check_sequence(5, 9), SeqCheck::Gap(3));
        assert_eq!(check_sequence(5, 5), SeqCheck::Stale);
        assert_eq!(check_sequence(5, 2), SeqCheck::Stale);
    }

    #[test]
    fn stream_reader_drops_stale_and_counts_gaps() {
        let mut r = StreamReader::new();
        let s = |seq| OrientationSample::new(seq, seq * 50, 0.0, 0.0, 0.0);
        assert!(r.accept(s(1)).is_some());
        assert!(r.accept(s(4)).is_some());
        assert!(r.accept(s(3)).is_none());
        assert!(r.accept(s(4)).is_none());
        assert!(r.accept(s(5)).is_some());
        assert_eq!((r.accepted, r.dropped_stale, r.missing), (3, 2, 2));
    }

    #[test]
    fn phrases() {
        assert_eq!(EventKind::from_phrase("start"), EventKind::Start);
        assert_eq!(EventKind::from_phrase("Switch to Arm"), EventKind::SwitchArm);
        assert_eq!(EventKind::from_phrase("switch_gripper"), EventKind::SwitchGripper);
        assert_eq!(EventKind::from_phrase("switch to kitchen"), EventKind::Unrecognized);
        assert_eq!(EventKind::from_phrase(""), EventKind::Unrecognized);
        for k in EventKind::ALL {
            assert_eq!(k.as_str().parse::<EventKind>().unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn any_frame_decodes_or_types_an_error(bytes in proptest::collection::vec(any::<u8>(), 20)) {
            match decode_sample(&bytes) {
                Ok(s) => prop_assert!(s.is_normalized()),
                Err(e) => prop_assert!(matches!(e, DecodeError::NonFiniteAngle(_))),
            }
        }

        #[test]
        fn decode_matches_wrap_oracle(theta in -1.0e4f32..1.0e4f32) {
            let mut bytes = [0u8; 20];
            bytes[12..16].copy_from_slice(&theta.to_le_bytes());
            let s = decode_sample(&bytes).unwrap();
            prop_assert!((f64::from(s.pitch) - wrap_oracle(f64::from(theta))).abs() < 1e-3);
        }
    }
}
