//! Head-shake trigger on the yaw axis.
//!
//! A shake is a light left-right oscillation: within the trailing window the
//! yaw must swing at least `amplitude_deg` away from the reference and change
//! direction at least `min_reversals` times. Slow monotone turns (looking
//! around) never qualify.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::angle::delta_deg;
use crate::protocol::OrientationSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShakeConfig {
    pub amplitude_deg: f64,
    pub min_reversals: u32,
    pub window_ms: u32,
    pub refractory_ms: u32,
    /// A direction change only counts once yaw retreats this far from the
    /// last extreme; filters sensor jitter.
    pub hysteresis_deg: f64,
}

impl Default for ShakeConfig {
    fn default() -> Self {
        Self {
            amplitude_deg: 10.0,
            min_reversals: 3,
            window_ms: 1500,
            refractory_ms: 1000,
            hysteresis_deg: 2.0,
        }
    }
}

impl ShakeConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.amplitude_deg > 0.0 && self.amplitude_deg.is_finite()) {
            return Err("shake.amplitude_deg must be positive".into());
        }
        if self.min_reversals == 0 || self.window_ms == 0 {
            return Err("shake.min_reversals and shake.window_ms must be positive".into());
        }
        if !(self.hysteresis_deg > 0.0 && self.hysteresis_deg.is_finite()) {
            return Err("shake.hysteresis_deg must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ShakeDetector {
    cfg: ShakeConfig,
    window: VecDeque<(u32, f64)>,
    reversal_count: u32,
    refractory_until: Option<u32>,
}

impl ShakeDetector {
    pub fn new(cfg: ShakeConfig) -> Self {
        Self {
            cfg,
            window: VecDeque::new(),
            reversal_count: 0,
            refractory_until: None,
        }
    }

    pub fn reversal_count(&self) -> u32 {
        self.reversal_count
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.reversal_count = 0;
    }

    /// Feeds one yaw delta (degrees from the reference). Returns true when a
    /// shake completes on this sample.
    pub fn observe(&mut self, t_ms: u32, yaw_delta: f64) -> bool {
        if let Some(until) = self.refractory_until {
            if t_ms < until {
                return false;
            }
            self.refractory_until = None;
        }
        self.window.push_back((t_ms, yaw_delta));
        let horizon = t_ms.saturating_sub(self.cfg.window_ms);
        while self.window.front().is_some_and(|(t, _)| *t < horizon) {
            self.window.pop_front();
        }
        self.reversal_count = count_reversals(self.window.iter().map(|(_, d)| *d), self.cfg.hysteresis_deg);
        let peak = self.window.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max);
        if self.reversal_count >= self.cfg.min_reversals && peak >= self.cfg.amplitude_deg {
            self.reset();
            self.refractory_until = Some(t_ms.saturating_add(self.cfg.refractory_ms));
            true
        } else {
            false
        }
    }
}

/// Number of direction changes with hysteresis `h`.
fn count_reversals(values: impl Iterator<Item = f64>, h: f64) -> u32 {
    #[derive(Clone, Copy)]
    enum Dir {
        Unknown { lo: f64, hi: f64 },
        Up(f64),
        Down(f64),
    }
    let mut dir: Option<Dir> = None;
    let mut count = 0;
    for v in values {
        dir = Some(match dir {
            None => Dir::Unknown { lo: v, hi: v },
            Some(Dir::Unknown { lo, hi }) => {
                if v - lo >= h {
                    Dir::Up(v)
                } else if hi - v >= h {
                    Dir::Down(v)
                } else {
                    Dir::Unknown { lo: lo.min(v), hi: hi.max(v) }
                }
            }
            Some(Dir::Up(peak)) => {
                if v > peak {
                    Dir::Up(v)
                } else if peak - v >= h {
                    count += 1;
                    Dir::Down(v)
                } else {
                    Dir::Up(peak)
                }
            }
            Some(Dir::Down(trough)) => {
                if v < trough {
                    Dir::Down(v)
                } else if v - trough >= h {
                    count += 1;
                    Dir::Up(v)
                } else {
                    Dir::Down(trough)
                }
            }
        });
    }
    count
}

/// Convenience wrapper matching the sample-level view of the detector.
pub fn detect_shake(state: &mut ShakeDetector, sample: &OrientationSample, yaw_ref: f64) -> bool {
    state.observe(sample.t_ms, delta_deg(f64::from(sample.yaw), yaw_ref))
}
