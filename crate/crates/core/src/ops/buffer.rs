use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::StatefulTransform;

const BUFFER: &str = "buffer";

/// Keeps the last `n` inputs, oldest first, NaN-padded at the front.
///
/// Scalar inputs give `vector[n]`, `vector[m]` inputs give `matrix[n x m]`.
#[derive(Debug, Clone)]
pub struct Buffer {
    len: usize,
    fill: Option<Tensor>,
}

impl Buffer {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::param("buffer length must be at least 1"));
        }
        Ok(Buffer { len, fill: None })
    }

    /// A buffer pre-filled with `fill` instead of NaN.
    pub fn with_fill(len: usize, fill: Tensor) -> Result<Self> {
        let mut b = Self::new(len)?;
        b.fill = Some(fill);
        Ok(b)
    }

    pub fn size(&self) -> usize {
        self.len
    }

    fn initial(&self, input: Shape) -> Result<Tensor> {
        let shape = self.output_shape(input)?;
        match &self.fill {
            None => Ok(Tensor::nan(shape)),
            Some(fill) => {
                fill.expect_shape(input)?;
                let data = fill.data().repeat(self.len);
                Tensor::new(shape, data)
            }
        }
    }
}

/// Drops the oldest row and appends `input` as the newest.
pub(crate) fn push_row(buffer: &mut Tensor, input: &Tensor) -> Result<()> {
    let width = input.len();
    let data = buffer.data_mut();
    if width == 0 || !data.len().is_multiple_of(width) {
        return Err(Error::Shape {
            expected: format!("rows of {} elements", width),
            actual: format!("buffer of {} elements", data.len()),
        });
    }
    data.rotate_left(width);
    let n = data.len();
    data[n - width..].copy_from_slice(input.data());
    Ok(())
}

/// Row `i` of a stacked buffer, shaped like one input.
pub(crate) fn row(buffer: &Tensor, i: usize, shape: Shape) -> Tensor {
    let w = shape.len();
    Tensor::new(shape, buffer.data()[i * w..(i + 1) * w].to_vec()).expect("row width matches shape")
}

impl StatefulTransform for Buffer {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        input
            .stacked(self.len)
            .ok_or_else(|| Error::shape("scalar or vector", input))
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        Ok((
            TensorMap::new(),
            TensorMap::new().with(BUFFER, self.initial(input)?),
        ))
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let buf = state.tensor_mut(BUFFER)?;
        push_row(buf, input)?;
        let out = buf.clone();
        Ok((out, state))
    }
}

/// Shared shape of the three buffer-backed delay operators.
#[derive(Debug, Clone)]
struct Window {
    buffer: Buffer,
}

impl Window {
    fn new(k: usize, what: &str) -> Result<Self> {
        if k == 0 {
            return Err(Error::param(format!("{what} period must be at least 1")));
        }
        Ok(Window {
            buffer: Buffer::new(k + 1)?,
        })
    }

    fn init(&self, input: Shape) -> Result<(Params, State)> {
        self.buffer.output_shape(input)?;
        self.buffer.init(0, input)
    }

    /// Pushes `input` and returns the refreshed buffer.
    fn push<'s>(&self, state: &'s mut State, input: &Tensor) -> Result<&'s Tensor> {
        let buf = state.tensor_mut(BUFFER)?;
        push_row(buf, input)?;
        Ok(buf)
    }
}

/// `output[t] = input[t - k]`; the first `k` outputs are NaN.
#[derive(Debug, Clone)]
pub struct Lag {
    window: Window,
}

impl Lag {
    pub fn new(k: usize) -> Result<Self> {
        Ok(Lag {
            window: Window::new(k, "lag")?,
        })
    }

    /// A lag whose first `k` outputs are `initial` instead of NaN.
    pub fn with_initial(k: usize, initial: Tensor) -> Result<Self> {
        let mut lag = Self::new(k)?;
        lag.window.buffer = Buffer::with_fill(k + 1, initial)?;
        Ok(lag)
    }
}

impl StatefulTransform for Lag {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.window.buffer.output_shape(input)?;
        Ok(input)
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        self.window.init(input)
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let buf = self.window.push(&mut state, input)?;
        let out = row(buf, 0, input.shape());
        Ok((out, state))
    }
}

/// `output[t] = input[t] - input[t - k]`.
#[derive(Debug, Clone)]
pub struct Diff {
    window: Window,
}

impl Diff {
    pub fn new(k: usize) -> Result<Self> {
        Ok(Diff {
            window: Window::new(k, "diff")?,
        })
    }
}

impl StatefulTransform for Diff {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.window.buffer.output_shape(input)?;
        Ok(input)
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        self.window.init(input)
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let buf = self.window.push(&mut state, input)?;
        let old = &buf.data()[..input.len()];
        let data = input.data().iter().zip(old).map(|(x, o)| x - o).collect();
        Ok((Tensor::new(input.shape(), data)?, state))
    }
}

/// `output[t] = input[t] / input[t - k] - 1`, NaN where the base is zero.
#[derive(Debug, Clone)]
pub struct PctChange {
    window: Window,
}

impl PctChange {
    pub fn new(k: usize) -> Result<Self> {
        Ok(PctChange {
            window: Window::new(k, "pct_change")?,
        })
    }
}

impl StatefulTransform for PctChange {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.window.buffer.output_shape(input)?;
        Ok(input)
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        self.window.init(input)
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let buf = self.window.push(&mut state, input)?;
        let old = &buf.data()[..input.len()];
        let data = input
            .data()
            .iter()
            .zip(old)
            .map(|(&x, &o)| if o == 0.0 { f64::NAN } else { x / o - 1.0 })
            .collect();
        Ok((Tensor::new(input.shape(), data)?, state))
    }
}
