use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::{csv_error, format_value, parse_value};
use crate::error::{Error, Result};
use crate::timecodec::TimestampNs;

/// How the timestamp column was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFormat {
    /// ISO-8601 in UTC, written back as `YYYY-MM-DDTHH:MM:SS.nnnnnnnnnZ`.
    Iso8601,
    /// Integer nanoseconds since the Unix epoch.
    Nanos,
}

/// A CSV time series held column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time_column: String,
    pub time_format: TimeFormat,
    pub timestamps: Vec<TimestampNs>,
    /// Timestamp cells as read; written back unchanged when present.
    pub time_text: Option<Vec<String>>,
    pub columns: Vec<String>,
    /// `values[c][t]`
    pub values: Vec<Vec<f64>>,
    /// Original cell text, same layout as `values`, when requested.
    pub text: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    /// Timestamp column name; the first column when unset.
    pub time_column: Option<String>,
    /// Data columns to keep, in output order; all others when unset.
    pub columns: Option<Vec<String>>,
    pub keep_text: bool,
}

impl Frame {
    pub fn rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.values[i].as_slice())
    }
}

/// Parses an ISO-8601 UTC timestamp or integer nanoseconds.
///
/// Accepted ISO forms: RFC 3339 with any offset, or a naive date-time
/// (`T` or space separated, up to nine fractional digits) or bare date,
/// both taken as UTC.
pub fn parse_timestamp(cell: &str) -> Option<(TimestampNs, TimeFormat)> {
    let cell = cell.trim();
    if let Ok(ns) = cell.parse::<i64>() {
        return Some((TimestampNs(ns), TimeFormat::Nanos));
    }
    let utc = if let Ok(dt) = DateTime::parse_from_rfc3339(cell) {
        dt.naive_utc()
    } else if let Some(dt) = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(cell, f).ok())
    {
        dt
    } else {
        NaiveDate::parse_from_str(cell, "%Y-%m-%d")
            .ok()?
            .and_hms_opt(0, 0, 0)?
    };
    let ns = utc.and_utc().timestamp_nanos_opt()?;
    Some((TimestampNs(ns), TimeFormat::Iso8601))
}

pub fn format_timestamp(ts: TimestampNs, format: TimeFormat) -> String {
    match format {
        TimeFormat::Nanos => ts.0.to_string(),
        TimeFormat::Iso8601 => DateTime::from_timestamp_nanos(ts.0)
            .format("%Y-%m-%dT%H:%M:%S%.9fZ")
            .to_string(),
    }
}

/// Reads a time series. Timestamps must be strictly increasing.
pub fn read_frame<R: Read>(input: R, options: &ReadOptions) -> Result<Frame> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("no column named {name:?}"),
        })
    };
    let time_idx = match &options.time_column {
        Some(name) => find(name)?,
        None => 0,
    };
    let data_idx: Vec<usize> = match &options.columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&i| i != time_idx).collect(),
    };
    if data_idx.contains(&time_idx) {
        return Err(Error::param("the timestamp column cannot also be a data column"));
    }

    let mut frame = Frame {
        time_column: header[time_idx].clone(),
        time_format: TimeFormat::Nanos,
        timestamps: Vec::new(),
        time_text: Some(Vec::new()),
        columns: data_idx.iter().map(|&i| header[i].clone()).collect(),
        values: vec![Vec::new(); data_idx.len()],
        text: options.keep_text.then(|| vec![Vec::new(); data_idx.len()]),
    };
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let (ts, format) = parse_timestamp(&record[time_idx]).ok_or_else(|| Error::Parse {
            line,
            message: format!("invalid timestamp {:?}", &record[time_idx]),
        })?;
        if let Some(&prev) = frame.timestamps.last() {
            if ts <= prev {
                return Err(Error::Ordering(format!(
                    "line {line}: timestamp {ts} does not follow {prev}"
                )));
            }
        } else {
            frame.time_format = format;
        }
        frame.timestamps.push(ts);
        if let Some(tt) = frame.time_text.as_mut() {
            tt.push(record[time_idx].to_string());
        }
        for (c, &i) in data_idx.iter().enumerate() {
            let cell = &record[i];
            let v = parse_value(cell).ok_or_else(|| Error::Parse {
                line,
                message: format!("column {:?}: invalid number {cell:?}", header[i]),
            })?;
            frame.values[c].push(v);
            if let Some(text) = frame.text.as_mut() {
                text[c].push(cell.to_string());
            }
        }
    }
    Ok(frame)
}

/// Writes the timestamp column followed by the data columns. Original cell
/// text is used where the frame carries it.
pub fn write_frame<W: Write>(frame: &Frame, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut record = Vec::with_capacity(frame.columns.len() + 1);
    record.push(frame.time_column.clone());
    record.extend(frame.columns.iter().cloned());
    w.write_record(&record).map_err(csv_error)?;
    for t in 0..frame.rows() {
        record.clear();
        record.push(match &frame.time_text {
            Some(tt) => tt[t].clone(),
            None => format_timestamp(frame.timestamps[t], frame.time_format),
        });
        match &frame.text {
            Some(text) => record.extend(text.iter().map(|col| col[t].clone())),
            None => record.extend(frame.values.iter().map(|col| format_value(col[t]))),
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
