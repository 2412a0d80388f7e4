use crate::bregman::WeightVector;

/// Iterate and adaptive statistics. `t` counts completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub theta: Vec<f64>,
    pub pi: WeightVector,
    pub m_theta: Vec<f64>,
    /// Per-coordinate second moment of the parameter gradient.
    pub v_theta: Vec<f64>,
    /// Momentum of the weight direction; used only by the `adam+adam` variant.
    pub m_pi: Vec<f64>,
    /// Running mean of the squared weight-gradient norm.
    pub v_pi: f64,
    pub t: usize,
}

impl OptimizerState {
    pub fn new(theta: Vec<f64>, pi: WeightVector) -> Self {
        let (d, m) = (theta.len(), pi.len());
        Self { theta, pi, m_theta: vec![0.0; d], v_theta: vec![0.0; d], m_pi: vec![0.0; m], v_pi: 0.0, t: 0 }
    }

    /// Bias-corrected parameter momentum `m_theta / (1 - alpha1^t)`.
    pub fn corrected_momentum(&self, alpha1: f64) -> Vec<f64> {
        let c = 1.0 - alpha1.powi(self.t as i32);
        self.m_theta.iter().map(|m| m / c).collect()
    }
}
