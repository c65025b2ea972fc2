//! Online linear regression against an environment whose true weights flip
//! sign at a fixed step.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use super::feedback::GymFeedback;
use super::learner::{OnlineSupervisedLearner, WEIGHTS};
use super::model::{LinearSquared, SupervisedModel};
use crate::error::{Error, Result};
use crate::io::format_value;
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::{seeded_rng, split_seed, unroll, Sequence, StatefulTransform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionConfig {
    pub seed: u64,
    pub dims: usize,
    pub steps: usize,
    /// First step that uses the flipped weights; `flip_step == steps`
    /// means no flip.
    pub flip_step: usize,
    pub noise_std: f64,
    pub learning_rate: f64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            seed: 0,
            dims: 3,
            steps: 4000,
            flip_step: 2000,
            noise_std: 0.1,
            learning_rate: 0.01,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.steps == 0 {
            return Err(Error::param("dims and steps must be positive"));
        }
        if self.flip_step == 0 || self.flip_step > self.steps {
            return Err(Error::param(format!(
                "flip step must lie in 1..={}, got {}",
                self.steps, self.flip_step
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::param("noise_std must be finite and non-negative"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Agent that learns from the previous `[x, y]` observation and acts by
/// publishing its updated weight vector.
#[derive(Debug, Clone)]
pub struct LearningAgent<M> {
    learner: OnlineSupervisedLearner<M>,
}

impl<M: SupervisedModel> LearningAgent<M> {
    pub fn new(learner: OnlineSupervisedLearner<M>) -> Self {
        LearningAgent { learner }
    }
}

impl<M: SupervisedModel> StatefulTransform for LearningAgent<M> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        self.learner.output_shape(input)?;
        Ok(Shape::Vector(self.learner.dims()))
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        self.learner.init(seed, input)
    }

    fn apply(&self, params: &Params, state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let (_, state) = self.learner.apply(params, state, input)?;
        let action = state.tensor(WEIGHTS)?.clone();
        Ok((action, state))
    }
}

/// Environment holding the true weights.
///
/// Input `[x_1..x_d, noise, a_1..a_d]`, output `[reward, x_1..x_d, y]` with
/// `y = w* . x + noise` and `reward = -(a . x - y)^2`. The weights are drawn
/// uniformly from `[-1, 1]` at init and negated when the step counter
/// reaches `flip_step`.
#[derive(Debug, Clone)]
pub struct FlippingRegressionEnv {
    dims: usize,
    flip_step: usize,
}

impl FlippingRegressionEnv {
    pub fn new(dims: usize, flip_step: usize) -> Self {
        FlippingRegressionEnv { dims, flip_step }
    }
}

impl StatefulTransform for FlippingRegressionEnv {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        let d = self.dims;
        if input != Shape::Vector(2 * d + 1) {
            return Err(Error::shape(Shape::Vector(2 * d + 1), input));
        }
        Ok(Shape::Vector(d + 2))
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        self.output_shape(input)?;
        let mut rng = seeded_rng(seed);
        let w: Vec<f64> = (0..self.dims).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Ok((
            TensorMap::new().with("w_star", Tensor::vector(w.clone())),
            TensorMap::new()
                .with("step", Tensor::scalar(0.0))
                .with("w_star", Tensor::vector(w)),
        ))
    }

    fn apply(&self, _params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        self.output_shape(input.shape())?;
        let d = self.dims;
        let step = state.tensor("step")?.as_scalar()?;
        *state.tensor_mut("step")? = Tensor::scalar(step + 1.0);
        let w_star = state.tensor_mut("w_star")?;
        if step as usize == self.flip_step {
            w_star.data_mut().iter_mut().for_each(|w| *w = -*w);
        }
        let data = input.data();
        let (x, noise, action) = (&data[..d], data[d], &data[d + 1..]);
        let y = LinearSquared.predict(w_star.data(), x) + noise;
        let loss = LinearSquared.loss(LinearSquared.predict(action, x), y);
        let mut out = Vec::with_capacity(d + 2);
        out.push(-loss);
        out.extend_from_slice(x);
        out.push(y);
        Ok((Tensor::vector(out), state))
    }
}

/// Per-step trace of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RegressionConfig,
    pub loss: Vec<f64>,
    pub regret: Vec<f64>,
    pub reward: Vec<f64>,
    /// Weights the agent acted with at each step.
    pub weights: Vec<Vec<f64>>,
    /// True weights in force at each step.
    pub true_weights: Vec<Vec<f64>>,
}

/// Raw environment inputs: `[x_1..x_d, noise]` per step.
pub fn regression_inputs(config: &RegressionConfig) -> Sequence {
    let mut rng = seeded_rng(split_seed(config.seed, "data"));
    let rows = (0..config.steps)
        .map(|_| {
            let mut row: Vec<f64> = (0..config.dims).map(|_| rng.sample(StandardNormal)).collect();
            let eps: f64 = rng.sample(StandardNormal);
            row.push(config.noise_std * eps);
            Tensor::vector(row)
        })
        .collect();
    Sequence::from_rows(rows)
}

/// The feedback loop used by [`nonstationary_regression_experiment`].
pub fn regression_loop(
    config: &RegressionConfig,
) -> Result<GymFeedback<LearningAgent<LinearSquared>, FlippingRegressionEnv>> {
    config.validate()?;
    let d = config.dims;
    let learner = OnlineSupervisedLearner::new(LinearSquared, config.learning_rate, vec![0.0; d])?;
    GymFeedback::new(
        LearningAgent::new(learner),
        FlippingRegressionEnv::new(d, config.flip_step),
        // no observation yet: the learner skips NaN rows
        Tensor::nan(Shape::Vector(d + 1)),
    )
}

pub fn nonstationary_regression_experiment(config: &RegressionConfig) -> Result<RunRecord> {
    let lp = regression_loop(config)?;
    let inputs = regression_inputs(config);
    let layout = lp.layout(Shape::Vector(config.dims + 1))?;
    let run = unroll(&lp, config.seed, &inputs)?;

    let star: Vec<String> = (0..config.dims).map(|i| format!("env/w_star[{i}]")).collect();
    let mut record = RunRecord {
        config: *config,
        loss: Vec::with_capacity(config.steps),
        regret: Vec::with_capacity(config.steps),
        reward: Vec::with_capacity(config.steps),
        weights: Vec::with_capacity(config.steps),
        true_weights: Vec::with_capacity(config.steps),
    };
    let mut regret = 0.0;
    for row in run.output.rows() {
        let out = layout.decode(row)?;
        let loss = -out.reward;
        regret += loss;
        record.loss.push(loss);
        record.regret.push(regret);
        record.reward.push(out.reward);
        record.weights.push(out.action);
        record
            .true_weights
            .push(star.iter().map(|k| out.diagnostics[k]).collect());
    }
    Ok(record)
}

impl RunRecord {
    /// Columns: `step,loss,regret,w_hat_1..w_hat_d,w_star_1..w_star_d,reward`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.config.dims;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "loss".into(), "regret".into()];
        header.extend((1..=d).map(|i| format!("w_hat_{i}")));
        header.extend((1..=d).map(|i| format!("w_star_{i}")));
        header.push("reward".into());
        w.write_record(&header).map_err(crate::io::csv_error)?;
        for t in 0..self.loss.len() {
            let mut rec = vec![
                t.to_string(),
                format_value(self.loss[t]),
                format_value(self.regret[t]),
            ];
            rec.extend(self.weights[t].iter().map(|&v| format_value(v)));
            rec.extend(self.true_weights[t].iter().map(|&v| format_value(v)));
            rec.push(format_value(self.reward[t]));
            w.write_record(&rec).map_err(crate::io::csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}
