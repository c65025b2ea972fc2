//! CSV time-series files and pipeline configuration.

mod config;
mod frame;

pub use config::{OpConfig, PipelineConfig, OP_NAMES};
pub use frame::{format_timestamp, parse_timestamp, read_frame, write_frame, Frame, ReadOptions, TimeFormat};

use crate::error::Error;

/// Lossless text form of a value; NaN becomes an empty cell.
///
/// Uses the shortest representation that parses back to the same bits,
/// switching to exponent notation outside `[1e-5, 1e16)`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Parses a cell; empty and `NaN` (any case) are missing values.
pub fn parse_value(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        Some(f64::NAN)
    } else {
        cell.parse().ok()
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn missing_cells() {
        assert!(parse_value("").unwrap().is_nan());
        assert!(parse_value(" NaN ").unwrap().is_nan());
        assert!(parse_value("nan").unwrap().is_nan());
        assert_eq!(format_value(f64::NAN), "");
        assert!(parse_value("x1").is_none());
    }

    #[test]
    fn readable_forms() {
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(5.0 / 3.0), "1.6666666666666667");
        assert_eq!(format_value(1e300), "1e300");
        assert_eq!(format_value(-2.5e-9), "-2.5e-9");
    }

    proptest! {
        #[test]
        fn value_text_round_trips(v in proptest::num::f64::ANY) {
            let back = parse_value(&format_value(v)).unwrap();
            if v.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), v.to_bits());
            }
        }
    }
}
