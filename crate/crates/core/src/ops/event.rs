use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::{split_seed, unroll, Identity, Sequence, StatefulTransform};

/// Runs `inner` only on steps whose event flag is set and re-emits the last
/// result otherwise.
///
/// Input is a vector whose first element is the event flag (non-zero means
/// true) followed by the payload. A payload of one element is passed to
/// `inner` as a scalar, longer payloads as a vector.
#[derive(Debug, Clone)]
pub struct UpdateOnEvent<T> {
    inner: T,
    initial_output: Tensor,
}

impl<T: StatefulTransform> UpdateOnEvent<T> {
    pub fn new(inner: T, initial_output: Tensor) -> Self {
        UpdateOnEvent {
            inner,
            initial_output,
        }
    }
}

pub(crate) fn payload_shape(input: Shape) -> Result<Shape> {
    match input {
        Shape::Vector(2) => Ok(Shape::Scalar),
        Shape::Vector(n) if n > 2 => Ok(Shape::Vector(n - 1)),
        other => Err(Error::shape("vector of event flag plus payload", other)),
    }
}

fn split_event(input: &Tensor) -> Result<(bool, Tensor)> {
    let shape = payload_shape(input.shape())?;
    let (flag, payload) = input.data().split_first().expect("payload shape checked");
    Ok((*flag != 0.0, Tensor::new(shape, payload.to_vec())?))
}

impl<T: StatefulTransform> StatefulTransform for UpdateOnEvent<T> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.inner.output_shape(payload_shape(input)?)
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        let out = self.output_shape(input)?;
        self.initial_output.expect_shape(out)?;
        let (params, inner) = self
            .inner
            .init(split_seed(seed, "inner"), payload_shape(input)?)?;
        Ok((
            TensorMap::new().with_map("inner", params),
            TensorMap::new()
                .with_map("inner", inner)
                .with("held", self.initial_output.clone()),
        ))
    }

    fn apply(&self, params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let (event, payload) = split_event(input)?;
        if event {
            let (key, inner) = state.take_map("inner")?;
            let (out, inner) = self.inner.apply(params.map("inner")?, inner, &payload)?;
            state.insert_map(key, inner);
            *state.tensor_mut("held")? = out;
        }
        let out = state.tensor("held")?.clone();
        Ok((out, state))
    }
}

/// Trailing open/high/low/close over segments delimited by reset events.
///
/// Input is `vector[2]` = `[reset, value]`, output is
/// `vector[4]` = `[open, high, low, close]`. The first step always opens a
/// segment. High and low skip NaN values.
#[derive(Debug, Clone)]
pub struct TrailingOhlc {
    open: UpdateOnEvent<Identity>,
}

impl Default for TrailingOhlc {
    fn default() -> Self {
        TrailingOhlc {
            open: UpdateOnEvent::new(Identity, Tensor::scalar(f64::NAN)),
        }
    }
}

impl TrailingOhlc {
    pub fn new() -> Self {
        Self::default()
    }
}

impl StatefulTransform for TrailingOhlc {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        if input != Shape::Vector(2) {
            return Err(Error::shape(Shape::Vector(2), input));
        }
        Ok(Shape::Vector(4))
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        self.output_shape(input)?;
        let (params, open) = self.open.init(split_seed(seed, "open"), input)?;
        Ok((
            TensorMap::new().with_map("open", params),
            TensorMap::new()
                .with_map("open", open)
                .with("started", Tensor::scalar(0.0))
                .with("high", Tensor::scalar(f64::NAN))
                .with("low", Tensor::scalar(f64::NAN)),
        ))
    }

    fn apply(&self, params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        input.expect_shape(Shape::Vector(2))?;
        let (reset, value) = (input.data()[0] != 0.0, input.data()[1]);
        let started = state.tensor("started")?.as_scalar()? != 0.0;
        let event = reset || !started;
        if !started {
            *state.tensor_mut("started")? = Tensor::scalar(1.0);
        }

        let (key, open_state) = state.take_map("open")?;
        let flagged = Tensor::vector(vec![if event { 1.0 } else { 0.0 }, value]);
        let (open, open_state) = self.open.apply(params.map("open")?, open_state, &flagged)?;
        state.insert_map(key, open_state);

        let high = state.tensor_mut("high")?;
        let h = if event {
            value
        } else {
            high.as_scalar()?.max(value)
        };
        *high = Tensor::scalar(h);
        let low = state.tensor_mut("low")?;
        let l = if event { value } else { low.as_scalar()?.min(value) };
        *low = Tensor::scalar(l);

        Ok((Tensor::vector(vec![open.as_scalar()?, h, l, value]), state))
    }
}

/// Computes trailing OHLC rows for `values` with segment resets.
pub fn trailing_ohlc(values: &Sequence, reset_events: &[bool]) -> Result<Sequence> {
    if values.len() != reset_events.len() {
        return Err(Error::Consistency(format!(
            "{} reset flags for {} values",
            reset_events.len(),
            values.len()
        )));
    }
    let rows = values
        .scalars()?
        .into_iter()
        .zip(reset_events)
        .map(|(v, &r)| Tensor::vector(vec![if r { 1.0 } else { 0.0 }, v]))
        .collect();
    let input = Sequence::new(values.timestamps().to_vec(), rows)?;
    Ok(unroll(&TrailingOhlc::new(), 0, &input)?.output)
}
