//! Line-oriented session recordings.
//!
//! ```text
//! #HAT-TRACE v1 scenario=cup cfg=<64 hex digits>
//! S <t_ms> <seq> <roll> <pitch> <yaw>
//! E <t_ms> <kind>
//! R <t_ms>
//! ```
//!
//! Angles carry four decimals. Records must be sorted by time and sample
//! sequence numbers must increase. Live recordings may append
//! `start=<unix ms>` to the header.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::protocol::{ControlEvent, EventKind, OrientationSample};
use crate::scenario::ScenarioId;

pub const HEADER_MAGIC: &str = "#HAT-TRACE";
pub const VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Record {
    Sample(OrientationSample),
    Event(ControlEvent),
    Reset { t_ms: u32 },
}

impl Record {
    pub fn t_ms(&self) -> u32 {
        match self {
            Record::Sample(s) => s.t_ms,
            Record::Event(e) => e.t_ms,
            Record::Reset { t_ms } => *t_ms,
        }
    }

    pub fn to_line(&self) -> String {
        match self {
            Record::Sample(s) => {
                format!("S {} {} {:.4} {:.4} {:.4}", s.t_ms, s.seq, s.roll, s.pitch, s.yaw)
            }
            Record::Event(e) => format!("E {} {}", e.t_ms, e.kind),
            Record::Reset { t_ms } => format!("R {t_ms}"),
        }
    }
}

/// Rounds an angle to the precision stored in traces, so that a live run
/// and the replay of its recording see identical inputs.
pub fn quantize_angle(a: f32) -> f32 {
    let q: f32 = format!("{a:.4}").parse().expect("formatted float parses");
    if q == -180.0 {
        180.0
    } else {
        q
    }
}

pub fn quantize_sample(s: OrientationSample) -> OrientationSample {
    OrientationSample {
        roll: quantize_angle(s.roll),
        pitch: quantize_angle(s.pitch),
        yaw: quantize_angle(s.yaw),
        ..s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub scenario: ScenarioId,
    pub cfg_hash: String,
    pub start_unix_ms: Option<u64>,
}

impl TraceHeader {
    pub fn to_line(&self) -> String {
        let mut line = format!("{HEADER_MAGIC} {VERSION} scenario={} cfg={}", self.scenario, self.cfg_hash);
        if let Some(start) = self.start_unix_ms {
            let _ = write!(line, " start={start}");
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Absent only for an empty trace file.
    pub header: Option<TraceHeader>,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("corrupt trace at line {line}: {reason}")]
    CorruptTrace { line: usize, reason: String },
}

fn corrupt(line: usize, reason: impl Into<String>) -> TraceError {
    TraceError::CorruptTrace { line, reason: reason.into() }
}

fn parse_header(line: &str, n: usize) -> Result<TraceHeader, TraceError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(HEADER_MAGIC) {
        return Err(corrupt(n, "missing #HAT-TRACE header"));
    }
    match parts.next() {
        Some(VERSION) => {}
        other => return Err(corrupt(n, format!("unsupported trace version {other:?}"))),
    }
    let (mut scenario, mut cfg_hash, mut start) = (None, None, None);
    for kv in parts {
        let (k, v) = kv.split_once('=').ok_or_else(|| corrupt(n, format!("bad header field `{kv}`")))?;
        match k {
            "scenario" => scenario = Some(v.parse::<ScenarioId>().map_err(|e| corrupt(n, e))?),
            "cfg" => {
                if v.len() != 64 || !v.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(corrupt(n, "cfg must be 64 hex digits"));
                }
                cfg_hash = Some(v.to_ascii_lowercase());
            }
            "start" => start = Some(v.parse::<u64>().map_err(|e| corrupt(n, format!("bad start: {e}")))?),
            _ => return Err(corrupt(n, format!("unknown header field `{k}`"))),
        }
    }
    Ok(TraceHeader {
        scenario: scenario.ok_or_else(|| corrupt(n, "header lacks scenario"))?,
        cfg_hash: cfg_hash.ok_or_else(|| corrupt(n, "header lacks cfg"))?,
        start_unix_ms: start,
    })
}

fn parse_record(line: &str, n: usize) -> Result<Record, TraceError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let num = |s: &str, what: &str| s.parse::<u32>().map_err(|e| corrupt(n, format!("bad {what} `{s}`: {e}")));
    let angle = |s: &str, what: &str| {
        let v = s.parse::<f32>().map_err(|e| corrupt(n, format!("bad {what} `{s}`: {e}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(corrupt(n, format!("non-finite {what}")))
        }
    };
    match fields.as_slice() {
        ["S", t, seq, roll, pitch, yaw] => Ok(Record::Sample(OrientationSample::new(
            num(seq, "seq")?,
            num(t, "t_ms")?,
            angle(roll, "roll")?,
            angle(pitch, "pitch")?,
            angle(yaw, "yaw")?,
        ))),
        ["E", t, kind] => Ok(Record::Event(ControlEvent {
            t_ms: num(t, "t_ms")?,
            kind: kind.parse::<EventKind>().map_err(|e| corrupt(n, e.to_string()))?,
        })),
        ["R", t] => Ok(Record::Reset { t_ms: num(t, "t_ms")? }),
        _ => Err(corrupt(n, format!("unrecognized record `{line}`"))),
    }
}

impl Trace {
    pub fn new(header: TraceHeader) -> Self {
        Self { header: Some(header), records: Vec::new() }
    }

    pub fn scenario(&self) -> Option<ScenarioId> {
        self.header.as_ref().map(|h| h.scenario)
    }

    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let Some((n, first)) = lines.next() else {
            return Ok(Trace { header: None, records: Vec::new() });
        };
        let header = parse_header(first, n)?;
        let mut records = Vec::new();
        for (n, line) in lines {
            records.push((n, parse_record(line, n)?));
        }
        let mut last_t = 0u32;
        let mut last_seq: Option<u32> = None;
        for (n, r) in &records {
            if r.t_ms() < last_t {
                return Err(corrupt(*n, format!("record at {} ms follows one at {last_t} ms", r.t_ms())));
            }
            last_t = r.t_ms();
            if let Record::Sample(s) = r {
                if last_seq.is_some_and(|prev| s.seq <= prev) {
                    return Err(corrupt(*n, format!("sample seq {} does not increase", s.seq)));
                }
                last_seq = Some(s.seq);
            }
        }
        Ok(Trace { header: Some(header), records: records.into_iter().map(|(_, r)| r).collect() })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.header {
            out.push_str(&h.to_line());
            out.push('\n');
        }
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn end_ms(&self) -> u32 {
        self.records.last().map_or(0, Record::t_ms)
    }
}

/// Append-only trace sink; each record is written as soon as it is known.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, header: &TraceHeader) -> io::Result<Self> {
        writeln!(out, "{}", header.to_line())?;
        Ok(Self { out })
    }

    pub fn append(&mut self, record: &Record) -> io::Result<()> {
        writeln!(self.out, "{}", record.to_line())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
