//! Streaming time-series engine built on pure stateful transforms.
//!
//! * [`transform`]: the `init`/`apply` contract, `unroll` and composition.
//! * [`ops`]: incremental NaN-aware operators (buffers, lags, rolling and
//!   exponentially weighted statistics, event gating, trailing OHLC).
//! * [`sync`]: causal alignment of secondary streams onto a local stream.
//! * [`timecodec`]: 32-bit word encoding of timestamps and label coding.
//! * [`learn`]: online supervised learning and agent/environment loops.
//! * [`io`]: CSV streams and pipeline configuration used by the CLI.

pub mod cli;
pub mod error;
pub mod io;
pub mod learn;
pub mod ops;
pub mod sync;
pub mod tensor;
pub mod timecodec;
pub mod transform;

pub use error::{Error, Result};
pub use tensor::{Params, Shape, State, Tensor, TensorMap};
pub use timecodec::TimestampNs;
pub use transform::{compose, unroll, unroll_from, Sequence, StatefulTransform, Unrolled};
