use super::buffer::{push_row, Buffer};
use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor};
use crate::transform::StatefulTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub length: usize,
    pub min_periods: usize,
}

impl WindowSpec {
    /// A full-window spec: `min_periods == length`.
    pub fn new(length: usize) -> Result<Self> {
        Self::with_min_periods(length, length)
    }

    pub fn with_min_periods(length: usize, min_periods: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::param("window length must be at least 1"));
        }
        if min_periods == 0 || min_periods > length {
            return Err(Error::param(format!(
                "min_periods must lie in 1..={length}, got {min_periods}"
            )));
        }
        Ok(WindowSpec { length, min_periods })
    }
}

/// Mean of the non-NaN values among the last `length` inputs, or NaN when
/// fewer than `min_periods` of them are present. Element-wise on vectors.
///
/// The window is summed oldest to newest on every step rather than kept as
/// a running sum, so the result never drifts from a direct recomputation.
#[derive(Debug, Clone)]
pub struct RollingMean {
    spec: WindowSpec,
    buffer: Buffer,
}

impl RollingMean {
    pub fn new(spec: WindowSpec) -> Self {
        RollingMean {
            spec,
            buffer: Buffer::new(spec.length).expect("validated window length"),
        }
    }
}

impl StatefulTransform for RollingMean {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.buffer.output_shape(input)?;
        Ok(input)
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        self.buffer.init(seed, input)
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let buf = state.tensor_mut("buffer")?;
        push_row(buf, input)?;
        let width = input.len();
        let data = buf.data();
        let out = (0..width)
            .map(|j| {
                let (sum, count) = data
                    .iter()
                    .skip(j)
                    .step_by(width)
                    .filter(|v| !v.is_nan())
                    .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
                if count >= self.spec.min_periods {
                    sum / count as f64
                } else {
                    f64::NAN
                }
            })
            .collect();
        Ok((Tensor::new(input.shape(), out)?, state))
    }
}
