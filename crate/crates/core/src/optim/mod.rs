//! Descent-ascent optimizers over `(theta, pi)`: plain, adaptive and
//! minibatch variants, a fixed-weight baseline, and the step-size rules that
//! come with the convergence analysis.

mod config;
mod oracle;
mod run;
mod state;
mod stepsize;
mod trace;

pub use config::{Adaptivity, BestResponseTracking, OptimizerConfig, Schedule};
pub use oracle::{BatchOracle, GaussianNoise};
pub use run::{adaptive_bgda_run, bgda_run, fixed_weight_run, sbgda_run, RunAborted, Runner};
pub use state::OptimizerState;
pub use stepsize::{lemma_theta_bound, linear_decay, theoretical_stepsizes, StepsizeMode, THEOREM_CONSTANT};
pub use trace::{RunTrace, TraceRecord};
