use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ops::Lag;
use crate::tensor::{Params, Shape, State, Tensor, TensorMap};
use crate::transform::{split_seed, StatefulTransform};

/// Agent/environment feedback loop as a single transform.
///
/// Each step the agent acts on the previous observation (the initial
/// observation on the first step); the environment turns the raw input and
/// that action into a reward and the next observation. The one-step
/// observation delay is a [`Lag`] seeded with the initial observation.
///
/// The environment input is `vector[raw + action]` (both flattened) and its
/// output must be `vector[1 + observation]`: the reward first.
/// Output rows are laid out as described by [`LoopLayout`].
#[derive(Debug, Clone)]
pub struct GymFeedback<A, E> {
    agent: A,
    env: E,
    initial_observation: Tensor,
    delay: Lag,
}

/// Positions inside a [`GymFeedback`] output row:
/// `[reward, action.., observation.., diagnostics..]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopLayout {
    pub action_len: usize,
    pub observation_len: usize,
    /// One name per diagnostic value: flattened agent state (`agent/..`)
    /// then environment state (`env/..`) after the step.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutput {
    pub reward: f64,
    pub action: Vec<f64>,
    pub observation: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl LoopLayout {
    pub fn width(&self) -> usize {
        1 + self.action_len + self.observation_len + self.diagnostics.len()
    }

    pub fn decode(&self, row: &Tensor) -> Result<LoopOutput> {
        row.expect_shape(Shape::Vector(self.width()))?;
        let d = row.data();
        let (a, o) = (1 + self.action_len, 1 + self.action_len + self.observation_len);
        Ok(LoopOutput {
            reward: d[0],
            action: d[1..a].to_vec(),
            observation: d[a..o].to_vec(),
            diagnostics: self
                .diagnostics
                .iter()
                .cloned()
                .zip(d[o..].iter().copied())
                .collect(),
        })
    }
}

fn diagnostic_names(prefix: &str, state: &State, out: &mut Vec<String>) {
    for (path, t) in state.flatten() {
        if t.len() == 1 {
            out.push(format!("{prefix}/{path}"));
        } else {
            out.extend((0..t.len()).map(|i| format!("{prefix}/{path}[{i}]")));
        }
    }
}

fn flat_len(shape: Shape) -> Result<usize> {
    match shape {
        Shape::Scalar | Shape::Vector(_) => Ok(shape.len()),
        other => Err(Error::shape("scalar or vector", other)),
    }
}

impl<A: StatefulTransform, E: StatefulTransform> GymFeedback<A, E> {
    pub fn new(agent: A, env: E, initial_observation: Tensor) -> Result<Self> {
        let delay = Lag::with_initial(1, initial_observation.clone())?;
        Ok(GymFeedback {
            agent,
            env,
            initial_observation,
            delay,
        })
    }

    fn obs_shape(&self) -> Shape {
        self.initial_observation.shape()
    }

    fn env_input(&self, raw: Shape) -> Result<Shape> {
        let action = self.agent.output_shape(self.obs_shape())?;
        Ok(Shape::Vector(flat_len(raw)? + flat_len(action)?))
    }

    pub fn layout(&self, raw: Shape) -> Result<LoopLayout> {
        let obs = self.obs_shape();
        let obs_len = flat_len(obs)?;
        let action = self.agent.output_shape(obs)?;
        let env_in = self.env_input(raw)?;
        let env_out = self.env.output_shape(env_in)?;
        if env_out != Shape::Vector(1 + obs_len) {
            return Err(Error::Shape {
                expected: format!("environment output {}", Shape::Vector(1 + obs_len)),
                actual: env_out.to_string(),
            });
        }
        let (_, agent_state) = self.agent.init(0, obs)?;
        let (_, env_state) = self.env.init(0, env_in)?;
        let mut diagnostics = Vec::new();
        diagnostic_names("agent", &agent_state, &mut diagnostics);
        diagnostic_names("env", &env_state, &mut diagnostics);
        Ok(LoopLayout {
            action_len: action.len(),
            observation_len: obs_len,
            diagnostics,
        })
    }
}

impl<A: StatefulTransform, E: StatefulTransform> StatefulTransform for GymFeedback<A, E> {
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        Ok(Shape::Vector(self.layout(input)?.width()))
    }

    fn init(&self, seed: u64, input: Shape) -> Result<(Params, State)> {
        self.layout(input)?;
        let obs = self.obs_shape();
        let (ap, as_) = self.agent.init(split_seed(seed, "agent"), obs)?;
        let (ep, es) = self.env.init(split_seed(seed, "env"), self.env_input(input)?)?;
        let (dp, ds) = self.delay.init(split_seed(seed, "delay"), obs)?;
        Ok((
            TensorMap::new()
                .with_map("agent", ap)
                .with_map("env", ep)
                .with_map("delay", dp),
            TensorMap::new()
                .with_map("agent", as_)
                .with_map("env", es)
                .with_map("delay", ds),
        ))
    }

    fn apply(&self, params: &Params, mut state: State, input: &Tensor) -> Result<(Tensor, State)> {
        let obs_shape = self.obs_shape();
        let obs_len = obs_shape.len();

        let (dk, delay) = state.take_map("delay")?;
        // newest row of the lag buffer is the previous observation
        let buffered = delay.tensor("buffer")?.data();
        let previous = Tensor::new(obs_shape, buffered[buffered.len() - obs_len..].to_vec())?;

        let (ak, agent) = state.take_map("agent")?;
        let (action, agent) = self.agent.apply(params.map("agent")?, agent, &previous)?;

        let mut env_in = Vec::with_capacity(input.len() + action.len());
        env_in.extend_from_slice(input.data());
        env_in.extend_from_slice(action.data());
        let (ek, env) = state.take_map("env")?;
        let (env_out, env) = self.env.apply(params.map("env")?, env, &Tensor::vector(env_in))?;
        env_out.expect_shape(Shape::Vector(1 + obs_len))?;
        let observation = Tensor::new(obs_shape, env_out.data()[1..].to_vec())?;

        let (_, delay) = self.delay.apply(params.map("delay")?, delay, &observation)?;

        let mut row = Vec::new();
        row.push(env_out.data()[0]);
        row.extend_from_slice(action.data());
        row.extend_from_slice(observation.data());
        for s in [&agent, &env] {
            for (_, t) in s.flatten() {
                row.extend_from_slice(t.data());
            }
        }

        state.insert_map(dk, delay);
        state.insert_map(ak, agent);
        state.insert_map(ek, env);
        Ok((Tensor::vector(row), state))
    }
}
