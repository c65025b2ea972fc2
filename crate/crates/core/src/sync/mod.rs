//! Alignment of secondary event streams onto a local stream.
//!
//! Synchronization runs in two passes. [`trace`] looks only at timestamps
//! and produces a [`Schedule`]: for every local step and every secondary
//! stream, which secondary rows may be read. [`execute`] then gathers those
//! rows into merged local rows. An event stamped `ts` on a stream with
//! latency `L` becomes visible at local time `ts + L`; nothing is scheduled
//! before it is visible.
//!
//! Slower streams are usually forward-filled (the latest visible event is
//! repeated). Faster streams are windowed: each step receives the events
//! that became visible since the previous local step, in a fixed-size block
//! of `n` rows, oldest first, NaN-padded at the front. When more than `n`
//! events arrive in one step only the newest `n` are kept and the number of
//! dropped events is recorded.

mod execute;
mod schedule_csv;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::timecodec::TimestampNs;

pub use execute::{execute, merged_layout, synchronized_unroll, SecondaryStream, Segment};
pub use schedule_csv::{read_schedule_csv, write_schedule_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ForwardFill,
    Window(usize),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::ForwardFill => f.write_str("ffill"),
            Mode::Window(n) => write!(f, "window:{n}"),
        }
    }
}

/// Parses `ffill` or `window:N` with `N >= 1`.
impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ffill" {
            return Ok(Mode::ForwardFill);
        }
        match s.strip_prefix("window:").map(|n| n.parse::<usize>()) {
            Some(Ok(n)) if n >= 1 => Ok(Mode::Window(n)),
            _ => Err(Error::param(format!(
                "invalid mode {s:?}; expected ffill or window:N with N >= 1"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSpec {
    pub name: String,
    pub timestamps: Vec<TimestampNs>,
    pub latency_ns: i64,
    pub mode: Mode,
}

/// What one secondary stream contributes to one local step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Index of the latest visible event, if any.
    Ffill(Option<usize>),
    /// Events `start..end`, preceded by `pad` NaN rows; `overflow` older
    /// events of this step were dropped.
    Window {
        start: usize,
        end: usize,
        pad: usize,
        overflow: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSchedule {
    pub name: String,
    pub mode: Mode,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub steps: usize,
    pub streams: Vec<StreamSchedule>,
}

impl Schedule {
    pub fn stream(&self, name: &str) -> Option<&StreamSchedule> {
        self.streams.iter().find(|s| s.name == name)
    }

    /// Total events dropped by window truncation, per stream.
    pub fn overflow(&self) -> Vec<(&str, usize)> {
        self.streams
            .iter()
            .map(|s| {
                let dropped = s
                    .slots
                    .iter()
                    .map(|slot| match slot {
                        Slot::Window { overflow, .. } => *overflow,
                        Slot::Ffill(_) => 0,
                    })
                    .sum();
                (s.name.as_str(), dropped)
            })
            .collect()
    }
}

fn check_local(local: &[TimestampNs]) -> Result<()> {
    match local.windows(2).position(|w| w[0] >= w[1]) {
        None => Ok(()),
        Some(i) => Err(Error::Ordering(format!(
            "local timestamps must strictly increase; index {} has {} after {}",
            i + 1,
            local[i + 1],
            local[i]
        ))),
    }
}

fn check_spec(spec: &StreamSpec) -> Result<()> {
    if spec.latency_ns < 0 {
        return Err(Error::param(format!(
            "stream '{}': latency must be non-negative, got {}",
            spec.name, spec.latency_ns
        )));
    }
    if spec.mode == Mode::Window(0) {
        return Err(Error::param(format!(
            "stream '{}': window buffer size must be at least 1",
            spec.name
        )));
    }
    if let Some(i) = spec.timestamps.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Ordering(format!(
            "stream '{}': timestamps decrease at index {}",
            spec.name,
            i + 1
        )));
    }
    Ok(())
}

/// Computes the access schedule from timestamps alone.
pub fn trace(local: &[TimestampNs], streams: &[StreamSpec]) -> Result<Schedule> {
    check_local(local)?;
    for (i, s) in streams.iter().enumerate() {
        check_spec(s)?;
        if streams[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::param(format!("duplicate stream name '{}'", s.name)));
        }
    }
    let streams = streams
        .iter()
        .map(|s| StreamSchedule {
            name: s.name.clone(),
            mode: s.mode,
            slots: trace_stream(local, s),
        })
        .collect();
    Ok(Schedule {
        steps: local.len(),
        streams,
    })
}

fn trace_stream(local: &[TimestampNs], spec: &StreamSpec) -> Vec<Slot> {
    // i128 so that ts + latency cannot overflow
    let visible = |i: usize| spec.timestamps[i].0 as i128 + spec.latency_ns as i128;
    let mut next = 0;
    local
        .iter()
        .map(|&now| {
            let first = next;
            while next < spec.timestamps.len() && visible(next) <= now.0 as i128 {
                next += 1;
            }
            match spec.mode {
                Mode::ForwardFill => Slot::Ffill(next.checked_sub(1)),
                Mode::Window(n) => {
                    let start = first.max(next.saturating_sub(n));
                    Slot::Window {
                        start,
                        end: next,
                        pad: n - (next - start),
                        overflow: start - first,
                    }
                }
            }
        })
        .collect()
}
