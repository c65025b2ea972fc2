use std::path::PathBuf;

use clap::Args;

use super::{open_input, with_thread_limit, OutputArg};
use crate::error::{Error, Result};
use crate::io::{read_frame, write_frame, Frame, OpConfig, PipelineConfig, ReadOptions};
use crate::tensor::Shape;
use crate::transform::unroll_columns;

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    /// Input CSV with a timestamp column and float columns.
    pub input: PathBuf,
    /// Pipeline configuration file.
    #[arg(long, short, conflicts_with = "op")]
    pub config: Option<PathBuf>,
    /// Single operator: lag, diff, pct_change, buffer, rolling_mean, ewma, ewmvar.
    #[arg(long)]
    pub op: Option<String>,
    #[arg(long, requires = "op")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "op", num_args = 0..=1, default_missing_value = "true")]
    pub adjust: Option<bool>,
    #[arg(long, requires = "op", num_args = 0..=1, default_missing_value = "true")]
    pub ignore_na: Option<bool>,
    /// Window length (rolling_mean) or buffer size (buffer).
    #[arg(long, requires = "op")]
    pub window: Option<usize>,
    #[arg(long, requires = "op")]
    pub min_periods: Option<usize>,
    /// Periods for lag, diff and pct_change.
    #[arg(long, requires = "op")]
    pub lag: Option<usize>,
    /// Timestamp column; overrides the config.
    #[arg(long)]
    pub timestamp: Option<String>,
    /// Comma-separated data columns; overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Seed passed to `init`; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArg,
}

impl ApplyArgs {
    fn pipeline(&self) -> Result<PipelineConfig> {
        let mut config = match (&self.config, &self.op) {
            (Some(path), _) => PipelineConfig::parse(&std::fs::read_to_string(path)?)?,
            (None, Some(name)) => {
                let mut params = Vec::new();
                let size_key = if name == "buffer" { "size" } else { "window" };
                let flags = [
                    ("alpha", self.alpha.map(|v| v.to_string())),
                    ("adjust", self.adjust.map(|v| v.to_string())),
                    ("ignore_na", self.ignore_na.map(|v| v.to_string())),
                    (size_key, self.window.map(|v| v.to_string())),
                    ("min_periods", self.min_periods.map(|v| v.to_string())),
                    ("periods", self.lag.map(|v| v.to_string())),
                ];
                for (k, v) in flags {
                    if let Some(v) = v {
                        params.push((k.to_string(), v));
                    }
                }
                let op = OpConfig::from_params(name, &params, 0).map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Parameter(message),
                    other => other,
                })?;
                PipelineConfig {
                    ops: vec![op],
                    ..Default::default()
                }
            }
            (None, None) => PipelineConfig::default(),
        };
        if self.timestamp.is_some() {
            config.timestamp = self.timestamp.clone();
        }
        if self.columns.is_some() {
            config.columns = self.columns.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn component_names(column: &str, shape: Shape) -> Vec<String> {
    match shape {
        Shape::Scalar => vec![column.to_string()],
        Shape::Vector(n) => (0..n).map(|i| format!("{column}[{i}]")).collect(),
        Shape::Matrix(r, c) => (0..r)
            .flat_map(|i| (0..c).map(move |j| format!("{column}[{i}][{j}]")))
            .collect(),
    }
}

/// Runs `config` over every column of `frame`, one independent stream per
/// column. Non-scalar outputs become one column per component.
pub fn apply_frame(frame: &Frame, config: &PipelineConfig) -> Result<Frame> {
    if config.ops.is_empty() {
        return Ok(frame.clone());
    }
    let transform = config.build()?;
    let shape = transform.output_shape(Shape::Scalar)?;
    let outputs = with_thread_limit(|| unroll_columns(&transform, config.seed, &frame.values))?;

    let mut columns = Vec::new();
    let mut values = Vec::new();
    for (name, out) in frame.columns.iter().zip(outputs) {
        let names = component_names(name, shape);
        let mut split = vec![Vec::with_capacity(frame.rows()); names.len()];
        for row in out {
            for (dst, &v) in split.iter_mut().zip(row.data()) {
                dst.push(v);
            }
        }
        columns.extend(names);
        values.extend(split);
    }
    Ok(Frame {
        columns,
        values,
        text: None,
        ..frame.clone_header()
    })
}

impl Frame {
    fn clone_header(&self) -> Frame {
        Frame {
            time_column: self.time_column.clone(),
            time_format: self.time_format,
            timestamps: self.timestamps.clone(),
            time_text: self.time_text.clone(),
            columns: Vec::new(),
            values: Vec::new(),
            text: None,
        }
    }
}

pub(super) fn run(args: &ApplyArgs) -> Result<()> {
    let config = args.pipeline()?;
    let options = ReadOptions {
        time_column: config.timestamp.clone(),
        columns: config.columns.clone(),
        keep_text: config.ops.is_empty(),
    };
    let frame = read_frame(open_input(&args.input)?, &options)?;
    let out = apply_frame(&frame, &config)?;
    write_frame(&out, args.output.open()?)
}
