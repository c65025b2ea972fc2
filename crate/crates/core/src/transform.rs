//! The stateful-transform contract and the drivers that fold a transform
//! over a sequence.
//!
//! A transform is a pair of pure functions. `init` builds parameters and an
//! initial state from a seed and the input shape; `apply` maps
//! `(params, state, input)` to `(output, next_state)`. The state is passed by
//! value and handed back, so nothing is shared between calls and the same
//! arguments always give the same result.

use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::timecodec::TimestampNs;

pub trait StatefulTransform: Send + Sync + fmt::Debug {
    /// Output shape produced for a given input shape, or a shape error.
    fn output_shape(&self, input: Shape) -> Result<Shape>;

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)>;

    fn apply(&self, params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)>;
}

impl<T: StatefulTransform + ?Sized> StatefulTransform for Box<T> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        (**self).output_shape(input)
    }
    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        (**self).init(seed, input)
    }
    fn apply(&self, params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)> {
        (**self).apply(params, state, input)
    }
}

impl<T: StatefulTransform + ?Sized> StatefulTransform for Arc<T> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        (**self).output_shape(input)
    }
    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        (**self).init(seed, input)
    }
    fn apply(&self, params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)> {
        (**self).apply(params, state, input)
    }
}

pub type BoxedTransform = Box<dyn StatefulTransform>;

/// Derives an independent child seed from `seed` and a tag.
///
/// The tag is hashed with FNV-1a and mixed with SplitMix64, so children of
/// one parent never collide for distinct tags in practice and the mapping is
/// stable across platforms and releases.
pub fn split_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Timestamped rows; timestamps strictly increase.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    timestamps: Vec<TimestampNs>,
    rows: Vec<Tensor>,
}

impl Sequence {
    pub fn new(timestamps: Vec<TimestampNs>, rows: Vec<Tensor>) -> Result<Self> {
        if timestamps.len() != rows.len() {
            return Err(Error::Consistency(format!(
                "{} timestamps for {} rows",
                timestamps.len(),
                rows.len()
            )));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Ordering(format!(
                "timestamps not strictly increasing at index {}: {} then {}",
                i + 1,
                timestamps[i],
                timestamps[i + 1]
            )));
        }
        Ok(Sequence { timestamps, rows })
    }

    /// Scalar rows stamped `0, 1, 2, ...` nanoseconds.
    pub fn from_scalars(values: &[f64]) -> Self {
        Sequence {
            timestamps: (0..values.len() as i64).map(TimestampNs).collect(),
            rows: values.iter().map(|&v| Tensor::scalar(v)).collect(),
        }
    }

    /// Rows stamped `0, 1, 2, ...` nanoseconds.
    pub fn from_rows(rows: Vec<Tensor>) -> Self {
        Sequence {
            timestamps: (0..rows.len() as i64).map(TimestampNs).collect(),
            rows,
        }
    }

    pub fn timestamps(&self) -> &[TimestampNs] {
        &self.timestamps
    }

    pub fn rows(&self) -> &[Tensor] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows `range` as a new sequence.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Sequence {
        Sequence {
            timestamps: self.timestamps[range.clone()].to_vec(),
            rows: self.rows[range].to_vec(),
        }
    }

    /// The common row shape, or a shape error naming the first offender.
    pub fn row_shape(&self) -> Result<Shape> {
        let first = self.rows.first().ok_or(Error::EmptyInput)?.shape();
        match self.rows.iter().position(|r| r.shape() != first) {
            None => Ok(first),
            Some(i) => Err(Error::Shape {
                expected: first.to_string(),
                actual: format!("{} at row {i}", self.rows[i].shape()),
            }),
        }
    }

    /// Flattened scalar values; fails unless every row is a scalar.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        self.rows.iter().map(Tensor::as_scalar).collect()
    }
}

/// Output of an unroll together with what is needed to resume it.
#[derive(Debug, Clone)]
pub struct Unrolled {
    pub output: Sequence,
    pub params: Params,
    pub state: State,
}

/// Incremental driver: feeds one input at a time and keeps the state.
#[derive(Debug)]
pub struct Unroller<'t, T: StatefulTransform + ?Sized> {
    transform: &'t T,
    params: Params,
    state: Option<State>,
    input_shape: Shape,
}

impl<'t, T: StatefulTransform + ?Sized> Unroller<'t, T> {
    pub fn new(transform: &'t T, seed: u64, input_shape: Shape) -> Result<Self> {
        let (params, state) = transform.init(seed, input_shape)?;
        Ok(Self::resume(transform, params, state, input_shape))
    }

    pub fn resume(transform: &'t T, params: Params, state: State, input_shape: Shape) -> Self {
        Unroller {
            transform,
            params,
            state: Some(state),
            input_shape,
        }
    }

    pub fn step(&mut self, input: &Tensor) -> Result<Tensor> {
        input.expect_shape(self.input_shape)?;
        let state = self
            .state
            .take()
            .ok_or_else(|| Error::Consistency("unroller poisoned by an earlier error".into()))?;
        let (out, next) = self.transform.apply(&self.params, state, input)?;
        self.state = Some(next);
        Ok(out)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn state(&self) -> Option<&State> {
        self.state.as_ref()
    }

    pub fn into_parts(self) -> Result<(Params, State)> {
        let state = self
            .state
            .ok_or_else(|| Error::Consistency("unroller poisoned by an earlier error".into()))?;
        Ok((self.params, state))
    }
}

/// Folds `t` over `seq`, threading state left to right from `init(seed)`.
pub fn unroll<T: StatefulTransform + ?Sized>(t: &T, seed: u64, seq: &Sequence) -> Result<Unrolled> {
    let shape = seq.row_shape()?;
    let (params, state) = t.init(seed, shape)?;
    unroll_from(t, params, state, seq)
}

/// Continues a fold from saved parameters and state. An empty `seq` hands
/// them back unchanged.
pub fn unroll_from<T: StatefulTransform + ?Sized>(
    t: &T,
    params: Params,
    state: State,
    seq: &Sequence,
) -> Result<Unrolled> {
    if seq.is_empty() {
        return Ok(Unrolled {
            output: seq.clone(),
            params,
            state,
        });
    }
    let shape = seq.row_shape()?;
    let mut driver = Unroller::resume(t, params, state, shape);
    let rows = seq
        .rows()
        .iter()
        .map(|r| driver.step(r))
        .collect::<Result<Vec<_>>>()?;
    let (params, state) = driver.into_parts()?;
    Ok(Unrolled {
        output: Sequence {
            timestamps: seq.timestamps.clone(),
            rows,
        },
        params,
        state,
    })
}

/// Runs a scalar transform independently over each column, in parallel.
///
/// `columns` are raw value columns sharing one length. The same seed is used
/// for every column. Workers come from the current rayon pool.
pub fn unroll_columns<T: StatefulTransform + ?Sized>(
    t: &T,
    seed: u64,
    columns: &[Vec<f64>],
) -> Result<Vec<Vec<Tensor>>> {
    use rayon::prelude::*;
    columns
        .par_iter()
        .map(|col| {
            let mut driver = Unroller::new(t, seed, Shape::Scalar)?;
            col.iter().map(|&v| driver.step(&Tensor::scalar(v))).collect()
        })
        .collect()
}

/// `outer ∘ inner`. State and params are namespaced under `inner/` and
/// `outer/`.
#[derive(Debug, Clone)]
pub struct Compose<O, I> {
    outer: O,
    inner: I,
}

pub fn compose<O: StatefulTransform, I: StatefulTransform>(outer: O, inner: I) -> Compose<O, I> {
    Compose { outer, inner }
}

impl<O: StatefulTransform, I: StatefulTransform> StatefulTransform for Compose<O, I> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.outer.output_shape(self.inner.output_shape(input)?)
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        let mid = self.inner.output_shape(input)?;
        let (ip, is) = self.inner.init(split_seed(seed, "inner"), input)?;
        let (op, os) = self.outer.init(split_seed(seed, "outer"), mid)?;
        Ok((
            TensorMap::new().with_map("inner", ip).with_map("outer", op),
            TensorMap::new().with_map("inner", is).with_map("outer", os),
        ))
    }

    fn apply(&self, params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let (ik, is) = state.take_map("inner")?;
        let (ok, os) = state.take_map("outer")?;
        let (mid, is) = self.inner.apply(params.map("inner")?, is, input)?;
        let (out, os) = self.outer.apply(params.map("outer")?, os, &mid)?;
        state.insert_map(ik, is);
        state.insert_map(ok, os);
        Ok((out, state))
    }
}

/// Chains transforms left to right: the first element sees the raw input.
pub fn chain(mut stages: Vec<BoxedTransform>) -> BoxedTransform {
    match stages.len() {
        0 => Box::new(Identity),
        1 => stages.pop().expect("one stage"),
        _ => {
            let first = stages.remove(0);
            stages
                .into_iter()
                .fold(first, |acc, next| Box::new(compose(next, acc)))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl StatefulTransform for Identity {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        Ok(input)
    }
    fn init(&self, _seed: u64, _input: Shape) -> Result<(Params, State)> {
        Ok((TensorMap::new(), TensorMap::new()))
    }
    fn apply(&self, _params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)> {
        Ok((input.clone(), state))
    }
}

type ShapeFn = dyn Fn(Shape) -> Result<Shape> + Send + Sync;
type MapFn = dyn Fn(&Tensor) -> Result<Tensor> + Send + Sync;

/// A stateless transform built from a closure.
pub struct FnTransform {
    shape: Box<ShapeFn>,
    f: Box<MapFn>,
}

impl FnTransform {
    pub fn new(
        shape: impl Fn(Shape) -> Result<Shape> + Send + Sync + 'static,
        f: impl Fn(&Tensor) -> Result<Tensor> + Send + Sync + 'static,
    ) -> Self {
        FnTransform {
            shape: Box::new(shape),
            f: Box::new(f),
        }
    }
}

impl fmt::Debug for FnTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnTransform")
    }
}

impl StatefulTransform for FnTransform {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        (self.shape)(input)
    }
    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        self.output_shape(input)?;
        Ok((TensorMap::new(), TensorMap::new()))
    }
    fn apply(&self, _params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)> {
        Ok(((self.f)(input)?, state))
    }
}
