use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;

use super::{open_input, OutputArg};
use crate::error::{Error, Result};
use crate::io::{read_frame, write_frame, Frame, ReadOptions};
use crate::sync::{execute, merged_layout, trace, write_schedule_csv, Mode, Schedule, StreamSpec};
use crate::tensor::Tensor;
use crate::transform::Sequence;

#[derive(Debug, Clone, Args)]
pub struct SyncArgs {
    /// Local stream; its timestamps drive the output rows.
    pub local: PathBuf,
    /// Secondary stream CSV, named after its file stem. Repeatable.
    #[arg(long = "stream", required = true)]
    pub streams: Vec<PathBuf>,
    /// `ffill` or `window:N`, one per stream or a single value for all.
    #[arg(long = "mode", default_value = "ffill")]
    pub modes: Vec<Mode>,
    /// Latency added to secondary timestamps, one per stream or a single
    /// value for all.
    #[arg(long = "latency-ns", default_value = "0", allow_negative_numbers = true)]
    pub latencies: Vec<i64>,
    /// Also write the schedule as CSV to this path.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArg,
}

fn per_stream<T: Copy>(what: &str, values: &[T], n: usize) -> Result<Vec<T>> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values.to_vec()),
        len => Err(Error::param(format!("{len} {what} values for {n} streams"))),
    }
}

fn to_sequence(frame: &Frame) -> Result<Sequence> {
    let rows = (0..frame.rows())
        .map(|t| Tensor::vector(frame.values.iter().map(|c| c[t]).collect()))
        .collect();
    Sequence::new(frame.timestamps.clone(), rows)
}

fn stream_name(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::param(format!("cannot name a stream after {}", path.display())))
}

/// Traces and merges named secondary frames onto `local`.
///
/// Output columns are the local columns, then per stream `name/col` for
/// forward fill or `name/col[k]` for window row `k` (oldest first).
pub fn sync_frames(local: &Frame, streams: &[(String, Frame, i64, Mode)]) -> Result<(Frame, Schedule)> {
    let specs: Vec<StreamSpec> = streams
        .iter()
        .map(|(name, f, latency_ns, mode)| StreamSpec {
            name: name.clone(),
            timestamps: f.timestamps.clone(),
            latency_ns: *latency_ns,
            mode: *mode,
        })
        .collect();
    let schedule = trace(&local.timestamps, &specs)?;
    let local_seq = to_sequence(local)?;
    let data: HashMap<String, Sequence> = streams
        .iter()
        .map(|(name, f, _, _)| Ok((name.clone(), to_sequence(f)?)))
        .collect::<Result<_>>()?;
    let merged = execute(&schedule, &local_seq, &data)?;

    let mut columns = local.columns.clone();
    let frames: HashMap<&str, &Frame> = streams.iter().map(|(n, f, _, _)| (n.as_str(), f)).collect();
    for seg in &merged_layout(&schedule, &local_seq, &data)?[1..] {
        let name = seg.stream.as_deref().expect("secondary segment");
        let cols = &frames[name].columns;
        for k in 0..seg.rows {
            for c in cols {
                columns.push(match schedule.stream(name).map(|s| s.mode) {
                    Some(Mode::Window(_)) => format!("{name}/{c}[{k}]"),
                    _ => format!("{name}/{c}"),
                });
            }
        }
    }
    let mut values = vec![Vec::with_capacity(merged.len()); columns.len()];
    for row in merged.rows() {
        for (dst, &v) in values.iter_mut().zip(row.data()) {
            dst.push(v);
        }
    }
    let frame = Frame {
        time_column: local.time_column.clone(),
        time_format: local.time_format,
        timestamps: local.timestamps.clone(),
        time_text: local.time_text.clone(),
        columns,
        values,
        text: None,
    };
    Ok((frame, schedule))
}

pub(super) fn run(args: &SyncArgs) -> Result<()> {
    let n = args.streams.len();
    let modes = per_stream("mode", &args.modes, n)?;
    let latencies = per_stream("latency", &args.latencies, n)?;
    let read = |p: &Path| read_frame(open_input(p)?, &ReadOptions::default());
    let local = read(&args.local)?;
    let streams = args
        .streams
        .iter()
        .zip(modes.into_iter().zip(latencies))
        .map(|(p, (mode, latency))| Ok((stream_name(p)?, read(p)?, latency, mode)))
        .collect::<Result<Vec<_>>>()?;
    let (merged, schedule) = sync_frames(&local, &streams)?;
    if let Some(path) = &args.schedule {
        write_schedule_csv(&schedule, BufWriter::new(File::create(path)?))?;
    }
    write_frame(&merged, args.output.open()?)
}
