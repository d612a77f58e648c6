//! Timed head-pose scripts for headless runs.
//!
//! One directive per line, times in seconds, `#` starts a comment:
//!
//! ```text
//! pose   0.0   0 0 0        # roll pitch yaw keyframe
//! event  0.5   start        # command token
//! hold   2.0                # repeat the previous keyframe at this time
//! reset  30.0               # environment reset
//! ```
//!
//! Keyframes are interpolated linearly and sampled at 20 Hz from the first
//! keyframe to the last. Two keyframes at the same time make a step change.
//! Tokens are the trace names (`switch_arm`) or phrases (`switch to arm`).

use thiserror::Error;

use crate::protocol::{ControlEvent, EventKind, OrientationSample};
use crate::trace::{Record, Trace, TraceHeader};

pub const SAMPLE_PERIOD_MS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub t_ms: u32,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub keyframes: Vec<Keyframe>,
    pub events: Vec<ControlEvent>,
    pub resets: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed script at line {line}: {reason}")]
pub struct MalformedScript {
    pub line: usize,
    pub reason: String,
}

fn seconds_to_ms(s: &str, line: usize) -> Result<u32, MalformedScript> {
    let bad = |reason: String| MalformedScript { line, reason };
    let v: f64 = s.parse().map_err(|e| bad(format!("bad time `{s}`: {e}")))?;
    if !(v >= 0.0 && v.is_finite() && v < 4.0e6) {
        return Err(bad(format!("time `{s}` out of range")));
    }
    Ok((v * 1000.0).round() as u32)
}

fn parse_token(words: &[&str], line: usize) -> Result<EventKind, MalformedScript> {
    let joined = words.join(" ");
    if let Ok(kind) = joined.parse::<EventKind>() {
        return Ok(kind);
    }
    match EventKind::from_phrase(&joined) {
        EventKind::Unrecognized => Err(MalformedScript { line, reason: format!("unknown token `{joined}`") }),
        kind => Ok(kind),
    }
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, MalformedScript> {
        let mut script = Script::default();
        let mut last_key_ms = 0u32;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let bad = |reason: String| MalformedScript { line: n, reason };
            match words.as_slice() {
                ["pose", t, roll, pitch, yaw] => {
                    let t_ms = seconds_to_ms(t, n)?;
                    let angle = |s: &str| {
                        s.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| bad(format!("bad angle `{s}`")))
                    };
                    let kf = Keyframe { t_ms, roll: angle(roll)?, pitch: angle(pitch)?, yaw: angle(yaw)? };
                    if t_ms < last_key_ms {
                        return Err(bad("keyframes must be in time order".into()));
                    }
                    last_key_ms = t_ms;
                    script.keyframes.push(kf);
                }
                ["hold", t] => {
                    let t_ms = seconds_to_ms(t, n)?;
                    let prev = *script.keyframes.last().ok_or_else(|| bad("hold before any pose".into()))?;
                    if t_ms < last_key_ms {
                        return Err(bad("keyframes must be in time order".into()));
                    }
                    last_key_ms = t_ms;
                    script.keyframes.push(Keyframe { t_ms, ..prev });
                }
                ["event", t, token @ ..] if !token.is_empty() => {
                    let t_ms = seconds_to_ms(t, n)?;
                    script.events.push(ControlEvent { t_ms, kind: parse_token(token, n)? });
                }
                ["reset", t] => script.resets.push(seconds_to_ms(t, n)?),
                _ => return Err(bad(format!("unrecognized directive `{line}`"))),
            }
        }
        Ok(script)
    }

    /// Head pose at `t_ms` by linear interpolation between keyframes.
    pub fn pose_at(&self, t_ms: u32) -> Option<(f64, f64, f64)> {
        let idx = self.keyframes.iter().rposition(|k| k.t_ms <= t_ms)?;
        let a = self.keyframes[idx];
        let Some(b) = self.keyframes.get(idx + 1) else {
            return Some((a.roll, a.pitch, a.yaw));
        };
        let u = f64::from(t_ms - a.t_ms) / f64::from(b.t_ms - a.t_ms);
        let lerp = |x: f64, y: f64| x + (y - x) * u;
        Some((lerp(a.roll, b.roll), lerp(a.pitch, b.pitch), lerp(a.yaw, b.yaw)))
    }

    /// 20 Hz samples from the first keyframe to the last.
    pub fn samples(&self) -> Vec<OrientationSample> {
        let (Some(first), Some(last)) = (self.keyframes.first(), self.keyframes.last()) else {
            return Vec::new();
        };
        (first.t_ms..=last.t_ms)
            .step_by(SAMPLE_PERIOD_MS as usize)
            .enumerate()
            .map(|(seq, t)| {
                let (roll, pitch, yaw) = self.pose_at(t).expect("inside keyframe span");
                OrientationSample::new(seq as u32, t, roll as f32, pitch as f32, yaw as f32)
            })
            .collect()
    }

    /// Merges samples, events and resets into a trace. At equal times a
    /// sample precedes an event, which precedes a reset.
    pub fn to_trace(&self, header: TraceHeader) -> Trace {
        let mut keyed: Vec<(u32, u8, usize, Record)> = Vec::new();
        for (i, s) in self.samples().into_iter().enumerate() {
            keyed.push((s.t_ms, 0, i, Record::Sample(s)));
        }
        for (i, e) in self.events.iter().enumerate() {
            keyed.push((e.t_ms, 1, i, Record::Event(*e)));
        }
        for (i, t) in self.resets.iter().enumerate() {
            keyed.push((*t, 2, i, Record::Reset { t_ms: *t }));
        }
        keyed.sort_by_key(|(t, class, i, _)| (*t, *class, *i));
        let mut trace = Trace::new(header);
        trace.records = keyed.into_iter().map(|(_, _, _, r)| r).collect();
        trace
    }
}
