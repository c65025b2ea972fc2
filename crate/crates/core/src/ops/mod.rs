//! Incremental NaN-aware operators, each a [`StatefulTransform`].
//!
//! [`StatefulTransform`]: crate::transform::StatefulTransform

mod buffer;
mod event;
mod ewm;
mod rolling;

pub use buffer::{Buffer, Diff, Lag, PctChange};
pub use event::{trailing_ohlc, TrailingOhlc, UpdateOnEvent};
pub use ewm::{ewma_direct, ewmcov_direct, EwSpec, EwmCov, EwmVar, Ewma};
pub use rolling::{RollingMean, WindowSpec};
