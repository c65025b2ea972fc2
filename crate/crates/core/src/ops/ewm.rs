//! Exponentially weighted mean, variance and covariance.
//!
//! Weights decay by `1 - alpha` per step. With `adjust` the estimate is the
//! normalized weighted sum over the whole history; without it the classic
//! recursion `m = alpha * x + (1 - alpha) * m` is used. NaN inputs are
//! missing observations: with `ignore_na` they are skipped entirely,
//! otherwise they still age the older weights.
//!
//! Variance and covariance are debiased with reliability weights:
//! `sum w (x - mx)(y - my) / (sum w - sum w^2 / sum w)`. The denominator
//! is evaluated as `2 sum_{i<j} w_i w_j / sum w`, tracked directly, since
//! the difference form cancels badly once old weights have decayed.

use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::StatefulTransform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwSpec {
    pub alpha: f64,
    pub adjust: bool,
    pub ignore_na: bool,
}

impl EwSpec {
    /// `adjust = true`, `ignore_na = false`.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_flags(alpha, true, false)
    }

    pub fn with_flags(alpha: f64, adjust: bool, ignore_na: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(EwSpec {
            alpha,
            adjust,
            ignore_na,
        })
    }

    fn decay(&self) -> f64 {
        1.0 - self.alpha
    }

    fn new_weight(&self) -> f64 {
        if self.adjust {
            1.0
        } else {
            self.alpha
        }
    }

    /// A missing input on a plain recursion without `ignore_na` is reported
    /// as missing rather than holding the previous value.
    fn masks_gap(&self) -> bool {
        !self.adjust && !self.ignore_na
    }
}

const MOMENTS: &str = "moments";

// EWMA moment columns.
const MEAN: usize = 0;
const OLD_WT: usize = 1;
const EWMA_COLS: usize = 2;

#[derive(Debug, Clone, Copy)]
pub struct Ewma {
    spec: EwSpec,
}

impl Ewma {
    pub fn new(spec: EwSpec) -> Self {
        Ewma { spec }
    }

    pub fn spec(&self) -> EwSpec {
        self.spec
    }

    fn step(&self, m: &mut [f64], x: f64) -> f64 {
        let spec = &self.spec;
        let observed = !x.is_nan();
        if m[MEAN].is_nan() {
            if observed {
                m[MEAN] = x;
                m[OLD_WT] = 1.0;
            }
            return m[MEAN];
        }
        if observed || !spec.ignore_na {
            m[OLD_WT] *= spec.decay();
        }
        if observed {
            let new_wt = spec.new_weight();
            if m[MEAN] != x {
                m[MEAN] = (m[OLD_WT] * m[MEAN] + new_wt * x) / (m[OLD_WT] + new_wt);
            }
            m[OLD_WT] = if spec.adjust { m[OLD_WT] + new_wt } else { 1.0 };
            m[MEAN]
        } else if spec.masks_gap() {
            f64::NAN
        } else {
            m[MEAN]
        }
    }
}

impl StatefulTransform for Ewma {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        Ok(input)
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        let moments = Tensor::new(
            Shape::Matrix(input.len(), EWMA_COLS),
            [f64::NAN, 1.0].repeat(input.len()),
        )?;
        Ok((TensorMap::new(), TensorMap::new().with(MOMENTS, moments)))
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let moments = state.tensor_mut(MOMENTS)?;
        check_rows(moments, input.len(), EWMA_COLS)?;
        let out = input
            .data()
            .iter()
            .zip(moments.data_mut().chunks_exact_mut(EWMA_COLS))
            .map(|(&x, m)| self.step(m, x))
            .collect();
        Ok((Tensor::new(input.shape(), out)?, state))
    }
}

// Covariance moment columns.
const MEAN_X: usize = 0;
const MEAN_Y: usize = 1;
const COV: usize = 2;
const SUM_WT: usize = 3;
/// `sum_{i<j} w_i w_j`
const PAIR_WT: usize = 4;
const COV_OLD_WT: usize = 5;
const NOBS: usize = 6;
const COV_COLS: usize = 7;

fn cov_init(n: usize) -> Result<Tensor> {
    Tensor::new(
        Shape::Matrix(n, COV_COLS),
        [f64::NAN, f64::NAN, 0.0, 1.0, 0.0, 1.0, 0.0].repeat(n),
    )
}

fn check_rows(moments: &Tensor, n: usize, cols: usize) -> Result<()> {
    if moments.shape() != Shape::Matrix(n, cols) {
        return Err(Error::shape(Shape::Matrix(n, cols), moments.shape()));
    }
    Ok(())
}

fn cov_step(spec: &EwSpec, m: &mut [f64], x: f64, y: f64) -> f64 {
    let observed = !x.is_nan() && !y.is_nan();
    if m[MEAN_X].is_nan() {
        if observed {
            m[MEAN_X] = x;
            m[MEAN_Y] = y;
            m[NOBS] = 1.0;
        }
        return f64::NAN;
    }
    if observed || !spec.ignore_na {
        let f = spec.decay();
        m[SUM_WT] *= f;
        m[PAIR_WT] *= f * f;
        m[COV_OLD_WT] *= f;
    }
    if observed {
        let new_wt = spec.new_weight();
        let old_wt = m[COV_OLD_WT];
        let (old_mx, old_my) = (m[MEAN_X], m[MEAN_Y]);
        if old_mx != x {
            m[MEAN_X] = (old_wt * old_mx + new_wt * x) / (old_wt + new_wt);
        }
        if old_my != y {
            m[MEAN_Y] = (old_wt * old_my + new_wt * y) / (old_wt + new_wt);
        }
        m[COV] = (old_wt * (m[COV] + (old_mx - m[MEAN_X]) * (old_my - m[MEAN_Y]))
            + new_wt * (x - m[MEAN_X]) * (y - m[MEAN_Y]))
            / (old_wt + new_wt);
        m[PAIR_WT] += new_wt * m[SUM_WT];
        m[SUM_WT] += new_wt;
        m[COV_OLD_WT] += new_wt;
        m[NOBS] += 1.0;
        if !spec.adjust {
            m[SUM_WT] /= m[COV_OLD_WT];
            m[PAIR_WT] /= m[COV_OLD_WT] * m[COV_OLD_WT];
            m[COV_OLD_WT] = 1.0;
        }
    } else if spec.masks_gap() {
        return f64::NAN;
    }
    if m[NOBS] < 2.0 {
        return f64::NAN;
    }
    if m[PAIR_WT] > 0.0 {
        m[SUM_WT] * m[SUM_WT] / (2.0 * m[PAIR_WT]) * m[COV]
    } else {
        f64::NAN
    }
}

/// Debiased exponentially weighted variance, element-wise.
#[derive(Debug, Clone, Copy)]
pub struct EwmVar {
    spec: EwSpec,
}

impl EwmVar {
    pub fn new(spec: EwSpec) -> Self {
        EwmVar { spec }
    }
}

impl StatefulTransform for EwmVar {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        Ok(input)
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        Ok((
            TensorMap::new(),
            TensorMap::new().with(MOMENTS, cov_init(input.len())?),
        ))
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let moments = state.tensor_mut(MOMENTS)?;
        check_rows(moments, input.len(), COV_COLS)?;
        let out = input
            .data()
            .iter()
            .zip(moments.data_mut().chunks_exact_mut(COV_COLS))
            .map(|(&x, m)| {
                let v = cov_step(&self.spec, m, x, x);
                // rounding can leave a tiny negative residue
                if v < 0.0 {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok((Tensor::new(input.shape(), out)?, state))
    }
}

/// Debiased exponentially weighted covariance of paired inputs.
///
/// Accepts `vector[2]` (one pair, scalar output) or `matrix[m x 2]`
/// (`m` independent pairs, `vector[m]` output).
#[derive(Debug, Clone, Copy)]
pub struct EwmCov {
    spec: EwSpec,
}

impl EwmCov {
    pub fn new(spec: EwSpec) -> Self {
        EwmCov { spec }
    }
}

impl StatefulTransform for EwmCov {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        match input {
            Shape::Vector(2) => Ok(Shape::Scalar),
            Shape::Matrix(m, 2) => Ok(Shape::Vector(m)),
            other => Err(Error::shape("vector[2] or matrix[m x 2]", other)),
        }
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        let pairs = self.output_shape(input)?.len();
        Ok((TensorMap::new(), TensorMap::new().with(MOMENTS, cov_init(pairs)?)))
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let shape = self.output_shape(input.shape())?;
        let moments = state.tensor_mut(MOMENTS)?;
        check_rows(moments, shape.len(), COV_COLS)?;
        let out = input
            .data()
            .chunks_exact(2)
            .zip(moments.data_mut().chunks_exact_mut(COV_COLS))
            .map(|(p, m)| cov_step(&self.spec, m, p[0], p[1]))
            .collect();
        Ok((Tensor::new(shape, out)?, state))
    }
}

/// Explicit weights of every observation in `prefix` as seen from its last
/// step; `None` marks missing positions.
fn direct_weights(prefix: &[(f64, f64)], spec: &EwSpec) -> Vec<Option<f64>> {
    let observed: Vec<bool> = prefix.iter().map(|(x, y)| !x.is_nan() && !y.is_nan()).collect();
    let Some(first) = observed.iter().position(|&o| o) else {
        return vec![None; prefix.len()];
    };
    let last = observed.iter().rposition(|&o| o).expect("has an observation");
    // Age of each position measured in steps (or in observations with
    // ignore_na), relative to the newest observation. The shift cancels in
    // every ratio below and keeps alpha = 1 well defined.
    let mut ages = vec![0i32; prefix.len()];
    let mut age = 0i32;
    for i in (0..prefix.len()).rev() {
        ages[i] = age;
        if !spec.ignore_na || observed[i] {
            age += 1;
        }
    }
    let shift = ages[last];
    let f = spec.decay();
    observed
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            o.then(|| {
                let decay = f.powi(ages[i] - shift);
                if spec.adjust || i == first {
                    decay
                } else {
                    spec.alpha * decay
                }
            })
        })
        .collect()
}

/// Direct O(t) evaluation of the EWMA output at the last element of
/// `prefix`. Used to spot-check streamed results.
pub fn ewma_direct(prefix: &[f64], spec: &EwSpec) -> f64 {
    let Some(&last) = prefix.last() else {
        return f64::NAN;
    };
    if last.is_nan() && spec.masks_gap() && prefix.iter().any(|v| !v.is_nan()) {
        return f64::NAN;
    }
    let pairs: Vec<(f64, f64)> = prefix.iter().map(|&x| (x, x)).collect();
    let (num, den) = direct_weights(&pairs, spec)
        .iter()
        .zip(prefix)
        .filter_map(|(w, &x)| w.map(|w| (w * x, w)))
        .fold((0.0, 0.0), |(a, b), (wx, w)| (a + wx, b + w));
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

/// Direct O(t) evaluation of the debiased EW covariance at the last pair.
pub fn ewmcov_direct(prefix: &[(f64, f64)], spec: &EwSpec) -> f64 {
    let Some(&(lx, ly)) = prefix.last() else {
        return f64::NAN;
    };
    if (lx.is_nan() || ly.is_nan()) && spec.masks_gap() {
        return f64::NAN;
    }
    let weights = direct_weights(prefix, spec);
    let obs: Vec<(f64, f64, f64)> = weights
        .iter()
        .zip(prefix)
        .filter_map(|(w, &(x, y))| w.map(|w| (w, x, y)))
        .collect();
    if obs.len() < 2 {
        return f64::NAN;
    }
    let (sw, pair) = obs
        .iter()
        .fold((0.0, 0.0), |(sw, pair), o| (sw + o.0, pair + o.0 * sw));
    let mx = obs.iter().map(|o| o.0 * o.1).sum::<f64>() / sw;
    let my = obs.iter().map(|o| o.0 * o.2).sum::<f64>() / sw;
    let num: f64 = obs.iter().map(|o| o.0 * (o.1 - mx) * (o.2 - my)).sum();
    let den = 2.0 * pair / sw;
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}
