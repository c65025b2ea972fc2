use std::collections::HashMap;

use super::{trace, Mode, Schedule, Slot, StreamSpec};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::transform::{unroll, Sequence, StatefulTransform, Unrolled};

/// A secondary stream together with its payload.
#[derive(Debug, Clone)]
pub struct SecondaryStream {
    pub name: String,
    pub data: Sequence,
    pub latency_ns: i64,
    pub mode: Mode,
}

impl SecondaryStream {
    pub fn spec(&self) -> StreamSpec {
        StreamSpec {
            name: self.name.clone(),
            timestamps: self.data.timestamps().to_vec(),
            latency_ns: self.latency_ns,
            mode: self.mode,
        }
    }
}

/// Where one source lands inside a merged row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// `None` for the local stream.
    pub stream: Option<String>,
    pub offset: usize,
    /// Stacked source rows (window size, or 1).
    pub rows: usize,
    /// Flattened width of one source row.
    pub width: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn width_of(name: &str, seq: &Sequence) -> Result<usize> {
    match seq.row_shape() {
        Ok(shape) => Ok(shape.len()),
        Err(Error::EmptyInput) => Err(Error::Consistency(format!(
            "secondary stream '{name}' has no rows"
        ))),
        Err(e) => Err(e),
    }
}

/// Layout of merged rows: the local row first, then every stream in
/// schedule order.
pub fn merged_layout(
    schedule: &Schedule,
    local: &Sequence,
    streams: &HashMap<String, Sequence>,
) -> Result<Vec<Segment>> {
    let mut offset = local.row_shape()?.len();
    let mut out = vec![Segment {
        stream: None,
        offset: 0,
        rows: 1,
        width: offset,
    }];
    for s in &schedule.streams {
        let data = streams
            .get(&s.name)
            .ok_or_else(|| Error::Consistency(format!("no data for stream '{}'", s.name)))?;
        let width = width_of(&s.name, data)?;
        let rows = match s.mode {
            Mode::ForwardFill => 1,
            Mode::Window(n) => n,
        };
        out.push(Segment {
            stream: Some(s.name.clone()),
            offset,
            rows,
            width,
        });
        offset += rows * width;
    }
    Ok(out)
}

/// Materializes merged rows following `schedule`.
///
/// Every merged row is a flat vector laid out as described by
/// [`merged_layout`]. Missing forward-fill values and window padding are NaN.
pub fn execute(
    schedule: &Schedule,
    local: &Sequence,
    streams: &HashMap<String, Sequence>,
) -> Result<Sequence> {
    if schedule.steps != local.len() {
        return Err(Error::Consistency(format!(
            "schedule has {} steps but local stream has {} rows",
            schedule.steps,
            local.len()
        )));
    }
    let layout = merged_layout(schedule, local, streams)?;
    let total: usize = layout.iter().map(Segment::len).sum();

    let sources: Vec<(&Sequence, usize)> = schedule
        .streams
        .iter()
        .zip(&layout[1..])
        .map(|(s, seg)| (&streams[&s.name], seg.width))
        .collect();
    for (s, (data, _)) in schedule.streams.iter().zip(&sources) {
        if s.slots.len() != schedule.steps {
            return Err(Error::Consistency(format!(
                "stream '{}' has {} slots for {} steps",
                s.name,
                s.slots.len(),
                schedule.steps
            )));
        }
        let max_index = s.slots.iter().filter_map(|slot| match *slot {
            Slot::Ffill(i) => i,
            Slot::Window { start, end, .. } if end > start => Some(end - 1),
            Slot::Window { .. } => None,
        });
        if let Some(i) = max_index.max().filter(|&i| i >= data.len()) {
            return Err(Error::Consistency(format!(
                "schedule reads row {i} of stream '{}' which has {} rows",
                s.name,
                data.len()
            )));
        }
    }

    let rows = (0..schedule.steps)
        .map(|t| {
            let mut row = Vec::with_capacity(total);
            row.extend_from_slice(local.rows()[t].data());
            for (s, &(data, width)) in schedule.streams.iter().zip(&sources) {
                match s.slots[t] {
                    Slot::Ffill(Some(i)) => row.extend_from_slice(data.rows()[i].data()),
                    Slot::Ffill(None) => row.extend(std::iter::repeat_n(f64::NAN, width)),
                    Slot::Window { start, end, pad, .. } => {
                        row.extend(std::iter::repeat_n(f64::NAN, pad * width));
                        for r in &data.rows()[start..end] {
                            row.extend_from_slice(r.data());
                        }
                    }
                }
            }
            Tensor::vector(row)
        })
        .collect();
    Sequence::new(local.timestamps().to_vec(), rows)
}

/// Traces, merges and unrolls in one call.
pub fn synchronized_unroll<T: StatefulTransform + ?Sized>(
    t: &T,
    seed: u64,
    local: &Sequence,
    streams: &[SecondaryStream],
) -> Result<Unrolled> {
    if streams.is_empty() {
        return unroll(t, seed, local);
    }
    let specs: Vec<StreamSpec> = streams.iter().map(SecondaryStream::spec).collect();
    let schedule = trace(local.timestamps(), &specs)?;
    let data = streams.iter().map(|s| (s.name.clone(), s.data.clone())).collect();
    let merged = execute(&schedule, local, &data)?;
    unroll(t, seed, &merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timecodec::TimestampNs;

    fn seq(ts: &[i64], vals: &[f64]) -> Sequence {
        Sequence::new(
            ts.iter().copied().map(TimestampNs).collect(),
            vals.iter().map(|&v| Tensor::scalar(v)).collect(),
        )
        .unwrap()
    }

    fn run(local: &Sequence, streams: &[SecondaryStream]) -> Vec<Vec<f64>> {
        let specs: Vec<_> = streams.iter().map(SecondaryStream::spec).collect();
        let schedule = trace(local.timestamps(), &specs).unwrap();
        let data = streams.iter().map(|s| (s.name.clone(), s.data.clone())).collect();
        execute(&schedule, local, &data)
            .unwrap()
            .rows()
            .iter()
            .map(|r| r.data().to_vec())
            .collect()
    }

    fn stream(name: &str, data: Sequence, mode: Mode) -> SecondaryStream {
        SecondaryStream {
            name: name.into(),
            data,
            latency_ns: 0,
            mode,
        }
    }

    #[test]
    fn aligned_ffill_is_a_zip() {
        let local = seq(&[1, 2, 3], &[1.0, 2.0, 3.0]);
        let other = stream("b", seq(&[1, 2, 3], &[10.0, 20.0, 30.0]), Mode::ForwardFill);
        assert_eq!(
            run(&local, &[other]),
            vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]]
        );
    }

    #[test]
    fn missing_ffill_is_nan() {
        let local = seq(&[1, 2], &[1.0, 2.0]);
        let other = stream("b", seq(&[2], &[7.0]), Mode::ForwardFill);
        let rows = run(&local, &[other]);
        assert!(rows[0][1].is_nan());
        assert_eq!(rows[1], vec![2.0, 7.0]);
    }

    #[test]
    fn window_rows_follow_trace() {
        let local = seq(&[10, 20], &[0.0, 0.0]);
        let other = stream(
            "b",
            seq(&[5, 12, 15, 22], &[5.0, 12.0, 15.0, 22.0]),
            Mode::Window(2),
        );
        let rows = run(&local, &[other]);
        assert!(rows[0][1].is_nan());
        assert_eq!(rows[0][2], 5.0);
        assert_eq!(rows[1], vec![0.0, 12.0, 15.0]);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let local = seq(&[1, 2], &[1.0, 2.0]);
        let specs = [StreamSpec {
            name: "b".into(),
            timestamps: vec![TimestampNs(1), TimestampNs(2)],
            latency_ns: 0,
            mode: Mode::ForwardFill,
        }];
        let schedule = trace(local.timestamps(), &specs).unwrap();
        let short: HashMap<_, _> = [("b".to_string(), seq(&[1], &[1.0]))].into();
        assert!(matches!(
            execute(&schedule, &local, &short),
            Err(Error::Consistency(_))
        ));
        let other = seq(&[1], &[1.0]);
        let data: HashMap<_, _> = [("b".to_string(), seq(&[1, 2], &[1.0, 2.0]))].into();
        assert!(matches!(
            execute(&schedule, &other, &data),
            Err(Error::Consistency(_))
        ));
        assert!(matches!(
            execute(&schedule, &local, &HashMap::new()),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn layout_offsets() {
        let local = Sequence::from_rows(vec![Tensor::vector(vec![1.0, 2.0])]);
        let specs = [
            StreamSpec {
                name: "f".into(),
                timestamps: vec![TimestampNs(0)],
                latency_ns: 0,
                mode: Mode::ForwardFill,
            },
            StreamSpec {
                name: "w".into(),
                timestamps: vec![TimestampNs(0)],
                latency_ns: 0,
                mode: Mode::Window(3),
            },
        ];
        let schedule = trace(local.timestamps(), &specs).unwrap();
        let data: HashMap<_, _> = [
            ("f".to_string(), Sequence::from_scalars(&[1.0])),
            (
                "w".to_string(),
                Sequence::from_rows(vec![Tensor::vector(vec![1.0, 2.0])]),
            ),
        ]
        .into();
        let layout = merged_layout(&schedule, &local, &data).unwrap();
        let offsets: Vec<_> = layout.iter().map(|s| (s.offset, s.rows, s.width)).collect();
        assert_eq!(offsets, vec![(0, 1, 2), (2, 1, 1), (3, 3, 2)]);
        let merged = execute(&schedule, &local, &data).unwrap();
        assert_eq!(merged.rows()[0].len(), 9);
    }
}
