use serde::Serialize;

use crate::bregman::WeightVector;
use crate::error::{Error, Result};
use crate::optim::{RunTrace, StepsizeMode};
use crate::saddle::{SaddleProblem, SmoothnessInfo};

/// Per-step slack of the weight-error recursion
/// `D_{t+1} <= factor * D_t + coefficient * gamma_t^2 * ||grad Phi(theta^t)||^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub factor: f64,
    /// Multiplies `gamma_theta^2 ||grad Phi||^2`.
    pub coefficient: f64,
    /// `RHS - LHS` for each step `t -> t+1`.
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    pub violations: usize,
}

/// Checks the weight-error recursion on every consecutive pair of trace rows.
///
/// General mode uses `1 - 1/(64 kappa^2)` and `264 kappa^6`; restricted mode
/// uses `1 - 1/(64 kappa_pi^2)` and `264 kappa_pi^4 kappa^2`. A step counts as
/// a violation when its slack is negative beyond a rounding allowance of a
/// few ulps of the two sides.
pub fn verify_contraction(trace: &RunTrace, info: &SmoothnessInfo, mode: StepsizeMode) -> Result<ContractionReport> {
    let gaps = trace.best_response_gaps()?;
    let grads = trace.grad_phi_norms()?;
    let (factor, coefficient) = match mode {
        StepsizeMode::General => (1.0 - 1.0 / (64.0 * info.kappa * info.kappa), 264.0 * info.kappa.powi(6)),
        StepsizeMode::Restricted => (
            1.0 - 1.0 / (64.0 * info.kappa_pi * info.kappa_pi),
            264.0 * info.kappa_pi.powi(4) * info.kappa * info.kappa,
        ),
    };
    let mut slacks = Vec::with_capacity(gaps.len().saturating_sub(1));
    let mut violations = 0;
    for t in 0..gaps.len().saturating_sub(1) {
        let gamma = trace.records[t].stepsize_theta;
        let rhs = factor * gaps[t] + coefficient * gamma * gamma * grads[t] * grads[t];
        let lhs = gaps[t + 1];
        let slack = rhs - lhs;
        if slack < -16.0 * f64::EPSILON * (rhs.abs() + lhs.abs()) {
            violations += 1;
        }
        slacks.push(slack);
    }
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ContractionReport { factor, coefficient, slacks, min_slack, violations })
}

/// `eps^2 = mean of ||grad Phi(theta^t)||^2 over t = 1 .. T-1` for a trace of
/// `T` steps.
pub fn stationarity(trace: &RunTrace) -> Result<f64> {
    stationarity_prefix(trace, trace.len().saturating_sub(1))
}

/// [`stationarity`] of the first `steps` steps of a longer run.
pub fn stationarity_prefix(trace: &RunTrace, steps: usize) -> Result<f64> {
    let grads = trace.grad_phi_norms()?;
    if steps < 2 || steps > grads.len() {
        return Err(Error::invalid(format!("stationarity needs 2 <= T <= {}, got {steps}", grads.len())));
    }
    let terms = &grads[1..steps];
    Ok(terms.iter().map(|g| g * g).sum::<f64>() / terms.len() as f64)
}

/// Smoothness of the regularizer in the weights over the simplex cut by the
/// ball `||pi - U|| <= radius`, where `U` is the uniform vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictedSmoothness {
    pub l_pi: f64,
    /// Smallest coordinate attainable on the restricted domain.
    pub a_min: f64,
    /// Radius actually used.
    pub radius: f64,
    /// Whether the requested radius reached the simplex boundary and was reduced.
    pub clipped: bool,
}

const CLIP_FRACTION: f64 = 0.999;

/// `lambda / a_min`, with `a_min` the smallest coordinate on the restricted
/// domain. The minimizer puts one coordinate at `a` and spreads the rest evenly,
/// so `a_min` is the root in `[0, 1/M]` of `dist(a) = radius`; it is found by
/// bisection.
pub fn restricted_smoothness(lambda: f64, m: usize, radius: f64) -> Result<RestrictedSmoothness> {
    if m < 2 {
        return Err(Error::invalid(format!("restricted smoothness needs M >= 2, got {m}")));
    }
    if !(lambda > 0.0 && radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("lambda and radius must be positive"));
    }
    let mf = m as f64;
    let center = 1.0 / mf;
    // distance from U of the point (a, (1-a)/(M-1), ...)
    let dist = |a: f64| {
        let rest = (1.0 - a) / (mf - 1.0);
        ((a - center).powi(2) + (mf - 1.0) * (rest - center).powi(2)).sqrt()
    };
    let edge = dist(0.0);
    let (radius, clipped) = if radius >= edge { (CLIP_FRACTION * edge, true) } else { (radius, false) };
    let (mut lo, mut hi) = (0.0, center);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * center {
            break;
        }
    }
    let a_min = 0.5 * (lo + hi);
    Ok(RestrictedSmoothness { l_pi: lambda / a_min, a_min, radius, clipped })
}

/// `(RHS - LHS)` of the symmetrized strong-concavity inequality
/// `L(pi1) <= L(pi2) + <grad_pi L(pi2), pi1 - pi2> - lambda/2 (D(pi1,pi2) + D(pi2,pi1))`
/// at fixed `theta`.
pub fn symmetric_concavity_slack(
    problem: &SaddleProblem,
    theta: &[f64],
    pi1: &WeightVector,
    pi2: &WeightVector,
) -> Result<f64> {
    let gen = problem.generator();
    let lhs = problem.objective(theta, pi1)?;
    let grad = problem.grad_pi(theta, pi2)?;
    let linear: f64 = grad.iter().zip(pi1.iter().zip(pi2.iter())).map(|(g, (a, b))| g * (a - b)).sum();
    let sym = gen.divergence(pi1, pi2)? + gen.divergence(pi2, pi1)?;
    let rhs = problem.objective(theta, pi2)? + linear - 0.5 * problem.lambda() * sym;
    Ok(rhs - lhs)
}

/// `L(pi1) - L(pi2) - <grad_pi L(pi2), pi1 - pi2> + lambda D(pi1, pi2)`, which
/// vanishes for any generator because the objective is linear in the weights
/// minus a scaled divergence.
pub fn concavity_identity_residual(
    problem: &SaddleProblem,
    theta: &[f64],
    pi1: &WeightVector,
    pi2: &WeightVector,
) -> Result<f64> {
    let grad = problem.grad_pi(theta, pi2)?;
    let linear: f64 = grad.iter().zip(pi1.iter().zip(pi2.iter())).map(|(g, (a, b))| g * (a - b)).sum();
    Ok(problem.objective(theta, pi1)? - problem.objective(theta, pi2)? - linear
        + problem.lambda() * problem.generator().divergence(pi1, pi2)?)
}
