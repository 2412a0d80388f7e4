use serde::{Deserialize, Serialize};

use super::selftest::SelfTestCheck;
use crate::error::{Error, Result};
use crate::optim::{RunTrace, StepsizeMode};
use crate::pinn::{window_stats, WindowStats};
use crate::saddle::SmoothnessInfo;
use crate::synthetic::{stationarity, verify_contraction};

pub const SUMMARY_SCHEMA: &str = "bgda-summary/1";

/// Number of iteration groups the conflict ratio is summarized over.
pub const CHI_WINDOWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Aborted,
    Selftest,
}

/// Contraction check recomputed from the trace and the constants in its header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSummary {
    pub mode: StepsizeMode,
    pub factor: f64,
    pub coefficient: f64,
    pub steps: usize,
    pub min_slack: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub schema: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub algorithm: Option<String>,
    pub problem: Option<String>,
    /// Steps taken, one less than the number of trace rows.
    pub iterations: usize,
    pub final_losses: Vec<f64>,
    pub final_pi: Vec<f64>,
    pub final_l2re: Option<f64>,
    /// Mean squared envelope gradient norm, when the trace carries it.
    pub stationarity: Option<f64>,
    pub chi_windows: Vec<WindowStats>,
    pub contraction: Option<ContractionSummary>,
    pub selftest: Option<Vec<SelfTestCheck>>,
}

impl Summary {
    pub fn for_selftest(checks: Vec<SelfTestCheck>) -> Self {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Self {
            schema: SUMMARY_SCHEMA.into(),
            status: RunStatus::Selftest,
            error: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
            algorithm: None,
            problem: None,
            iterations: 0,
            final_losses: Vec::new(),
            final_pi: Vec::new(),
            final_l2re: None,
            stationarity: None,
            chi_windows: Vec::new(),
            contraction: None,
            selftest: Some(checks),
        }
    }
}

fn meta_f64(trace: &RunTrace, key: &str) -> Option<f64> {
    trace.meta_value(key)?.parse().ok()
}

/// Smoothness constants stored in a trace header, if all are present.
pub fn smoothness_from_meta(trace: &RunTrace) -> Option<(SmoothnessInfo, StepsizeMode)> {
    let info = SmoothnessInfo {
        l: meta_f64(trace, "l")?,
        l_pi: meta_f64(trace, "l_pi")?,
        lambda: meta_f64(trace, "lambda")?,
        kappa: meta_f64(trace, "kappa")?,
        kappa_pi: meta_f64(trace, "kappa_pi")?,
    };
    let mode = match trace.meta_value("stepsize_mode")? {
        "general" => StepsizeMode::General,
        "restricted" => StepsizeMode::Restricted,
        _ => return None,
    };
    Some((info, mode))
}

/// Everything in the summary is a function of the trace rows and header.
pub fn summarize_trace(trace: &RunTrace) -> Result<Summary> {
    let last = trace.records.last().ok_or_else(|| Error::invalid("cannot summarize an empty trace"))?;
    let status = match trace.meta_value("status") {
        Some("aborted") => RunStatus::Aborted,
        _ => RunStatus::Completed,
    };
    let stationarity = match trace.grad_phi_norms() {
        Ok(g) if g.len() >= 3 => Some(stationarity(trace)?),
        _ => None,
    };
    let contraction = match (smoothness_from_meta(trace), trace.best_response_gaps().is_ok() && trace.grad_phi_norms().is_ok()) {
        (Some((info, mode)), true) => {
            let report = verify_contraction(trace, &info, mode)?;
            Some(ContractionSummary {
                mode,
                factor: report.factor,
                coefficient: report.coefficient,
                steps: report.slacks.len(),
                min_slack: if report.slacks.is_empty() { 0.0 } else { report.min_slack },
                violations: report.violations,
            })
        }
        _ => None,
    };
    Ok(Summary {
        schema: SUMMARY_SCHEMA.into(),
        status,
        error: trace.meta_value("error").map(str::to_string),
        algorithm: trace.meta_value("algorithm").map(str::to_string),
        problem: trace.meta_value("problem").map(str::to_string),
        iterations: trace.len() - 1,
        final_losses: last.losses.clone(),
        final_pi: last.pi.clone(),
        final_l2re: trace.last_l2re(),
        stationarity,
        chi_windows: window_stats(&trace.chi_series(), CHI_WINDOWS),
        contraction,
        selftest: None,
    })
}
