use clap::{Args, ValueEnum};
use rand::Rng;
use rand_distr::StandardNormal;

use super::OutputArg;
use crate::error::Result;
use crate::io::{write_frame, Frame, TimeFormat};
use crate::learn::{nonstationary_regression_experiment, RegressionConfig};
use crate::ops::trailing_ohlc;
use crate::timecodec::TimestampNs;
use crate::transform::{seeded_rng, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    /// Hourly temperatures with a trailing daily open/high/low/close.
    Ohlc,
    /// Online linear regression whose true weights flip sign mid-run.
    OnlineRegression,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    pub name: DemoName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArg,
}

const HOUR_NS: i64 = 3_600_000_000_000;
/// 2024-01-01T00:00:00Z
const DEMO_START_NS: i64 = 1_704_067_200_000_000_000;
const DEMO_DAYS: usize = 14;

/// Columns `time,temperature,reset,open,high,low,close`; `reset` is 1 at
/// each midnight.
pub fn ohlc_demo(seed: u64) -> Result<Frame> {
    let mut rng = seeded_rng(seed);
    let hours = DEMO_DAYS * 24;
    let timestamps: Vec<TimestampNs> = (0..hours as i64)
        .map(|h| TimestampNs(DEMO_START_NS + h * HOUR_NS))
        .collect();
    let temps: Vec<f64> = (0..hours)
        .map(|h| {
            let phase = 2.0 * std::f64::consts::PI * ((h % 24) as f64 - 9.0) / 24.0;
            let noise: f64 = rng.sample(StandardNormal);
            12.0 + 6.0 * phase.sin() + 1.5 * noise
        })
        .collect();
    let resets: Vec<bool> = (0..hours).map(|h| h % 24 == 0).collect();
    let values = Sequence::new(
        timestamps.clone(),
        temps.iter().map(|&v| crate::tensor::Tensor::scalar(v)).collect(),
    )?;
    let ohlc = trailing_ohlc(&values, &resets)?;

    let mut cols = vec![temps, resets.iter().map(|&r| if r { 1.0 } else { 0.0 }).collect()];
    for k in 0..4 {
        cols.push(ohlc.rows().iter().map(|r| r.data()[k]).collect());
    }
    Ok(Frame {
        time_column: "time".into(),
        time_format: TimeFormat::Iso8601,
        timestamps,
        time_text: None,
        columns: ["temperature", "reset", "open", "high", "low", "close"]
            .map(String::from)
            .to_vec(),
        values: cols,
        text: None,
    })
}

pub(super) fn run(args: &DemoArgs) -> Result<()> {
    let out = args.output.open()?;
    match args.name {
        DemoName::Ohlc => write_frame(&ohlc_demo(args.seed)?, out),
        DemoName::OnlineRegression => {
            let config = RegressionConfig {
                seed: args.seed,
                ..Default::default()
            };
            nonstationary_regression_experiment(&config)?.write_csv(out)
        }
    }
}
