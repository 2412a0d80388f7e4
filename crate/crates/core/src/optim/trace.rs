use crate::error::{Error, Result};

use super::state::OptimizerState;

/// Quantities measured at one iterate `(theta^t, pi^t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub losses: Vec<f64>,
    pub pi: Vec<f64>,
    /// `||grad_theta L(theta^t, pi^t)||`
    pub grad_theta_norm: f64,
    /// `||grad Phi(theta^t)||`, when the best response was computed.
    pub grad_phi_norm: Option<f64>,
    pub chi: Option<f64>,
    pub phi: Option<f64>,
    /// `D(pi*(theta^t), pi^t)`
    pub bregman_to_best_response: Option<f64>,
    pub l2re: Option<f64>,
    /// Parameter step taken from this iterate (the schedule value at `t`).
    pub stepsize_theta: f64,
    /// Seconds since the run started. Kept in memory only.
    pub wall_time: Option<f64>,
}

/// One row per iterate, `T + 1` rows for a completed run of `T` steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub m: usize,
    /// Ordered `key=value` annotations written into the trace header.
    pub meta: Vec<(String, String)>,
    pub records: Vec<TraceRecord>,
    pub final_state: Option<OptimizerState>,
}

impl RunTrace {
    pub fn new(m: usize) -> Self {
        Self { m, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    /// Values of an optional column; `MissingColumn` when any row lacks it.
    pub fn required(&self, name: &'static str, get: impl Fn(&TraceRecord) -> Option<f64>) -> Result<Vec<f64>> {
        if self.records.is_empty() {
            return Err(Error::MissingColumn(name));
        }
        self.records.iter().map(|r| get(r).ok_or(Error::MissingColumn(name))).collect()
    }

    pub fn grad_phi_norms(&self) -> Result<Vec<f64>> {
        self.required("grad_phi_norm", |r| r.grad_phi_norm)
    }

    pub fn best_response_gaps(&self) -> Result<Vec<f64>> {
        self.required("bregman_to_best_response", |r| r.bregman_to_best_response)
    }

    /// Present `chi` values in iteration order.
    pub fn chi_series(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.chi).collect()
    }

    pub fn last_l2re(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.l2re)
    }
}
