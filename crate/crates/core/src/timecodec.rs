//! Integer encodings for timestamps and string labels.
//!
//! Numeric kernels only see 32-bit words and dense integer codes; these
//! helpers convert to and from those forms losslessly.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Nanoseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimestampNs(pub i64);

impl TimestampNs {
    pub const MIN: TimestampNs = TimestampNs(i64::MIN);
    pub const MAX: TimestampNs = TimestampNs(i64::MAX);

    pub fn nanos(self) -> i64 {
        self.0
    }
}

impl From<i64> for TimestampNs {
    fn from(v: i64) -> Self {
        TimestampNs(v)
    }
}

impl fmt::Display for TimestampNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// A timestamp split into an arithmetic high word and an unsigned low word,
/// so that `value = hi * 2^32 + lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncodedTime {
    pub hi: i32,
    pub lo: u32,
}

pub fn encode_time(v: TimestampNs) -> EncodedTime {
    EncodedTime {
        hi: (v.0 >> 32) as i32,
        lo: v.0 as u32,
    }
}

pub fn decode_time(e: EncodedTime) -> TimestampNs {
    TimestampNs(((e.hi as i64) << 32) | e.lo as i64)
}

/// Sorted vocabulary plus one code per input position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelTable {
    pub vocabulary: Vec<String>,
    pub codes: Vec<u32>,
}

/// Codes each string by its rank in the sorted set of distinct inputs.
pub fn label_encode<S: AsRef<str>>(strings: &[S]) -> LabelTable {
    let vocabulary: Vec<String> = strings
        .iter()
        .map(|s| s.as_ref())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let codes = strings
        .iter()
        .map(|s| {
            // vocabulary is sorted and contains every input
            vocabulary
                .binary_search_by(|v| v.as_str().cmp(s.as_ref()))
                .expect("label present in vocabulary") as u32
        })
        .collect();
    LabelTable { vocabulary, codes }
}

pub fn label_decode(table: &LabelTable) -> Result<Vec<String>> {
    table
        .codes
        .iter()
        .map(|&c| {
            table.vocabulary.get(c as usize).cloned().ok_or_else(|| {
                Error::Range(format!(
                    "label code {c} outside vocabulary of size {}",
                    table.vocabulary.len()
                ))
            })
        })
        .collect()
}
