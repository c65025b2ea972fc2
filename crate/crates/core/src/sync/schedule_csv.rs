//! Flat CSV form of a [`Schedule`], one record per (step, stream):
//!
//! ```text
//! step,stream,kind,start,end,pad,overflow
//! 0,ground,ffill,,,1,0
//! 1,ground,ffill,0,1,0,0
//! 0,air,window,0,3,1,0
//! ```
//!
//! `kind` is `ffill` or `window`. `start..end` is the half-open range of
//! secondary row indices read at this step; for a forward-fill slot with no
//! visible event both are empty and `pad` is 1. For windows `pad` counts the
//! NaN rows placed before the events and `overflow` the events dropped, so
//! the window size is `end - start + pad`. Records are written step-major, in
//! stream order; readers accept any record order.

use std::io::{Read, Write};

use super::{Mode, Schedule, Slot, StreamSchedule};
use crate::error::{Error, Result};
use crate::io::csv_error;

const HEADER: [&str; 7] = ["step", "stream", "kind", "start", "end", "pad", "overflow"];

pub fn write_schedule_csv<W: Write>(schedule: &Schedule, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_error)?;
    for step in 0..schedule.steps {
        for s in &schedule.streams {
            let step_s = step.to_string();
            let rec: [String; 7] = match s.slots[step] {
                Slot::Ffill(Some(i)) => [
                    step_s,
                    s.name.clone(),
                    "ffill".into(),
                    i.to_string(),
                    (i + 1).to_string(),
                    "0".into(),
                    "0".into(),
                ],
                Slot::Ffill(None) => [
                    step_s,
                    s.name.clone(),
                    "ffill".into(),
                    String::new(),
                    String::new(),
                    "1".into(),
                    "0".into(),
                ],
                Slot::Window {
                    start,
                    end,
                    pad,
                    overflow,
                } => [
                    step_s,
                    s.name.clone(),
                    "window".into(),
                    start.to_string(),
                    end.to_string(),
                    pad.to_string(),
                    overflow.to_string(),
                ],
            };
            w.write_record(&rec).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Record {
    line: u64,
    step: usize,
    slot: Slot,
    window: Option<usize>,
}

fn parse_index(line: u64, field: &str, what: &str) -> Result<usize> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} '{field}'"),
    })
}

pub fn read_schedule_csv<R: Read>(input: R) -> Result<Schedule> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", HEADER.join(",")),
        });
    }

    let mut streams: Vec<(String, Vec<Record>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let step = parse_index(line, &rec[0], "step")?;
        let (start, end) = (rec[3].trim(), rec[4].trim());
        let pad = parse_index(line, &rec[5], "pad")?;
        let overflow = parse_index(line, &rec[6], "overflow")?;
        let (slot, window) = match rec[2].trim() {
            "ffill" if start.is_empty() && end.is_empty() => (Slot::Ffill(None), None),
            "ffill" => {
                let i = parse_index(line, start, "start")?;
                if parse_index(line, end, "end")? != i + 1 {
                    return Err(Error::Parse {
                        line,
                        message: "forward-fill range must cover exactly one row".into(),
                    });
                }
                (Slot::Ffill(Some(i)), None)
            }
            "window" => {
                let (start, end) = (parse_index(line, start, "start")?, parse_index(line, end, "end")?);
                if end < start {
                    return Err(Error::Parse {
                        line,
                        message: format!("empty range {start}..{end} is reversed"),
                    });
                }
                let slot = Slot::Window {
                    start,
                    end,
                    pad,
                    overflow,
                };
                (slot, Some(end - start + pad))
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown slot kind '{other}'"),
                })
            }
        };
        let record = Record {
            line,
            step,
            slot,
            window,
        };
        match streams.iter_mut().find(|(n, _)| n == &rec[1]) {
            Some((_, v)) => v.push(record),
            None => streams.push((rec[1].to_string(), vec![record])),
        }
    }

    let steps = streams.first().map_or(0, |(_, v)| v.len());
    let streams = streams
        .into_iter()
        .map(|(name, mut records)| {
            records.sort_by_key(|r| r.step);
            if records.len() != steps {
                return Err(Error::Parse {
                    line: records.last().map_or(0, |r| r.line),
                    message: format!("stream '{name}' has {} records, expected {steps}", records.len()),
                });
            }
            if let Some(r) = records.iter().enumerate().find(|(i, r)| r.step != *i) {
                return Err(Error::Parse {
                    line: r.1.line,
                    message: format!("stream '{name}': missing or repeated step near {}", r.1.step),
                });
            }
            let mode = match records[0].window {
                None => Mode::ForwardFill,
                Some(n) => Mode::Window(n),
            };
            if let Some(r) = records
                .iter()
                .find(|r| r.window.map_or(Mode::ForwardFill, Mode::Window) != mode)
            {
                return Err(Error::Parse {
                    line: r.line,
                    message: format!("stream '{name}' changes mode or window size"),
                });
            }
            Ok(StreamSchedule {
                name,
                mode,
                slots: records.into_iter().map(|r| r.slot).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule { steps, streams })
}
