use std::fmt;

/// A differentiable model with an analytic weight gradient of its loss.
pub trait SupervisedModel: Send + Sync + fmt::Debug {
    fn predict(&self, weights: &[f64], x: &[f64]) -> f64;

    fn loss(&self, prediction: f64, target: f64) -> f64;

    /// Gradient of `loss(predict(weights, x), target)` with respect to the
    /// weights.
    fn grad(&self, weights: &[f64], x: &[f64], target: f64) -> Vec<f64>;
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// `w . x` with squared loss.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearSquared;

impl SupervisedModel for LinearSquared {
    fn predict(&self, weights: &[f64], x: &[f64]) -> f64 {
        dot(weights, x)
    }

    fn loss(&self, prediction: f64, target: f64) -> f64 {
        let e = prediction - target;
        e * e
    }

    fn grad(&self, weights: &[f64], x: &[f64], target: f64) -> Vec<f64> {
        let r = 2.0 * (self.predict(weights, x) - target);
        x.iter().map(|xi| r * xi).collect()
    }
}

/// `sigmoid(w . x)` with cross-entropy loss; targets in `[0, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticCrossEntropy;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl SupervisedModel for LogisticCrossEntropy {
    fn predict(&self, weights: &[f64], x: &[f64]) -> f64 {
        sigmoid(dot(weights, x))
    }

    fn loss(&self, prediction: f64, target: f64) -> f64 {
        let p = prediction.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
    }

    fn grad(&self, weights: &[f64], x: &[f64], target: f64) -> Vec<f64> {
        let r = self.predict(weights, x) - target;
        x.iter().map(|xi| r * xi).collect()
    }
}
