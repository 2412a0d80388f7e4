//! Physics-informed loss terms for boundary-value problems on boxes.
//!
//! A problem is a list of linear differential conditions `sum_c a_c D_c u = f`
//! posed either in the interior or on a set of box faces. Each condition
//! becomes one loss term, the mean squared residual over its collocation
//! points, so an `M`-condition problem yields the `M` losses to be weighted.

mod collocation;
mod losses;
mod metrics;
mod problems;

pub use collocation::{evaluation_grid, sample_collocation, CollocationSet};
pub use losses::{loss_terms, PinnLosses};
pub use metrics::{conflict_ratio, l2re, window_stats, WindowStats};
pub use problems::{builtin_problem, builtin_problems, BoxDomain, Condition, ExactSolution, Face, PdeSpec, Region, ScalarField, Term};
