use super::model::SupervisedModel;
use crate::error::{Error, Result};
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::StatefulTransform;

pub(crate) const WEIGHTS: &str = "weights";
const LEARNING_RATE: &str = "learning_rate";

/// Online gradient descent as a transform.
///
/// Input `vector[d + 1]` is `[x_1..x_d, y]`. Output `vector[d + 2]` is
/// `[prediction, loss, w_1..w_d]`, computed with the weights held before
/// this step; the weights are then moved against the gradient and kept in
/// the state. Rows containing NaN are treated as missing: the output is
/// `[NaN, NaN, w]` and the weights do not move.
#[derive(Debug, Clone)]
pub struct OnlineSupervisedLearner<M> {
    model: M,
    learning_rate: f64,
    initial_weights: Vec<f64>,
}

impl<M: SupervisedModel> OnlineSupervisedLearner<M> {
    pub fn new(model: M, learning_rate: f64, initial_weights: Vec<f64>) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::param(format!(
                "learning rate must be finite and non-negative, got {learning_rate}"
            )));
        }
        if initial_weights.is_empty() {
            return Err(Error::param("at least one weight is required"));
        }
        Ok(OnlineSupervisedLearner {
            model,
            learning_rate,
            initial_weights,
        })
    }

    pub fn dims(&self) -> usize {
        self.initial_weights.len()
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: SupervisedModel> StatefulTransform for OnlineSupervisedLearner<M> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        let d = self.dims();
        if input != Shape::Vector(d + 1) {
            return Err(Error::shape(Shape::Vector(d + 1), input));
        }
        Ok(Shape::Vector(d + 2))
    }

    fn init(&self, _seed: u64, input: Shape) -> Result<(Params, State)> {
        self.output_shape(input)?;
        Ok((
            TensorMap::new().with(LEARNING_RATE, Tensor::scalar(self.learning_rate)),
            TensorMap::new().with(WEIGHTS, Tensor::vector(self.initial_weights.clone())),
        ))
    }

    fn apply(&self, params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        self.output_shape(input.shape())?;
        let lr = params.tensor(LEARNING_RATE)?.as_scalar()?;
        let d = self.dims();
        let (x, y) = (&input.data()[..d], input.data()[d]);
        let weights = state.tensor_mut(WEIGHTS)?;
        weights.expect_shape(Shape::Vector(d))?;

        let mut out = Vec::with_capacity(d + 2);
        if input.data().iter().any(|v| v.is_nan()) {
            out.extend([f64::NAN, f64::NAN]);
            out.extend_from_slice(weights.data());
            return Ok((Tensor::vector(out), state));
        }

        let w = weights.data_mut();
        let prediction = self.model.predict(w, x);
        let loss = self.model.loss(prediction, y);
        out.extend([prediction, loss]);
        out.extend_from_slice(w);

        let grad = self.model.grad(w, x, y);
        if grad.len() != d || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite or malformed gradient {grad:?}"
            )));
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= lr * gi;
        }
        Ok((Tensor::vector(out), state))
    }
}
