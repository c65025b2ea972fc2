//! Online learning built from stateful transforms.

mod experiment;
mod feedback;
mod learner;
mod model;

pub use experiment::{
    nonstationary_regression_experiment, regression_inputs, regression_loop, FlippingRegressionEnv,
    LearningAgent, RegressionConfig, RunRecord,
};
pub use feedback::{GymFeedback, LoopLayout, LoopOutput};
pub use learner::OnlineSupervisedLearner;
pub use model::{LinearSquared, LogisticCrossEntropy, SupervisedModel};
