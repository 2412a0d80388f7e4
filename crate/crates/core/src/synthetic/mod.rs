//! Quadratic min-max instances with computable smoothness constants, and the
//! trace analyses that check the convergence guarantees against them.

mod analysis;
mod finite_sum;
mod quadratic;

pub use analysis::{
    concavity_identity_residual, restricted_smoothness, stationarity, stationarity_prefix, symmetric_concavity_slack,
    verify_contraction, ContractionReport, RestrictedSmoothness,
};
pub use finite_sum::{FiniteSumNoise, Sampler};
pub use quadratic::{make_quadratic, QuadraticInstance, QuadraticLosses, QuadraticSpec};
