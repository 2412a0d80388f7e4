use serde::{Deserialize, Serialize};

use super::stepsize::linear_decay;
use crate::error::{Error, Result};

/// Schedule for the parameter step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    Constant,
    /// Linear interpolation from the initial step to `end` at the last iteration.
    Linear { end: f64 },
}

impl Schedule {
    pub fn at(self, initial: f64, t: usize, total: usize) -> f64 {
        match self {
            Schedule::Constant => initial,
            Schedule::Linear { end } => linear_decay(initial, end, t, total),
        }
    }
}

/// Which adaptive rule drives each block: parameters first, weights second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adaptivity {
    /// Adam on parameters, RMSProp-scaled prox steps on weights.
    #[default]
    #[serde(rename = "adam+rmsprop")]
    AdamRmsprop,
    /// Adds momentum to the weight direction.
    #[serde(rename = "adam+adam")]
    AdamAdam,
    /// No momentum on either block.
    #[serde(rename = "rmsprop+rmsprop")]
    RmspropRmsprop,
}

impl Adaptivity {
    pub fn name(self) -> &'static str {
        match self {
            Adaptivity::AdamRmsprop => "adam+rmsprop",
            Adaptivity::AdamAdam => "adam+adam",
            Adaptivity::RmspropRmsprop => "rmsprop+rmsprop",
        }
    }

    pub(crate) fn theta_momentum(self) -> bool {
        !matches!(self, Adaptivity::RmspropRmsprop)
    }

    pub(crate) fn pi_momentum(self) -> bool {
        matches!(self, Adaptivity::AdamAdam)
    }
}

/// When to compute the best response `pi*(theta)` for the trace columns that
/// need it (`grad_phi_norm`, `phi`, `bregman_to_best_response`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BestResponseTracking {
    /// Only when a closed form exists.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub gamma_theta: f64,
    pub gamma_pi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub eps_adapt: f64,
    pub schedule: Schedule,
    pub adaptivity: Adaptivity,
    pub batch_size: usize,
    pub iterations: usize,
    pub track_best_response: BestResponseTracking,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gamma_theta: 0.008,
            gamma_pi: 0.1,
            alpha1: 0.9,
            alpha2: 0.999,
            beta: 0.999,
            eps_adapt: 1e-8,
            schedule: Schedule::Linear { end: 0.0004 },
            adaptivity: Adaptivity::AdamRmsprop,
            batch_size: 1,
            iterations: 20_000,
            track_best_response: BestResponseTracking::Auto,
        }
    }
}

impl OptimizerConfig {
    /// Constant steps, no adaptivity-specific settings touched.
    pub fn constant(gamma_theta: f64, gamma_pi: f64, iterations: usize) -> Self {
        Self { gamma_theta, gamma_pi, iterations, schedule: Schedule::Constant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("gamma_theta", self.gamma_theta)?;
        positive("gamma_pi", self.gamma_pi)?;
        positive("eps_adapt", self.eps_adapt)?;
        if let Schedule::Linear { end } = self.schedule {
            positive("schedule.end", end)?;
        }
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("beta", self.beta)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn gamma_theta_at(&self, t: usize) -> f64 {
        self.schedule.at(self.gamma_theta, t, self.iterations)
    }
}
