//! Bregman gradient descent-ascent for min-max loss weighting.
//!
//! The objective is `min_theta max_{pi in S} sum_i pi_i L_i(theta) - lambda D(pi, pi_hat)`,
//! where the `L_i` are the loss terms of a multi-task problem (for a PINN: PDE
//! residual and boundary losses) and `D` is a Bregman divergence on the weight
//! simplex `S`.

pub mod autodiff;
pub mod bregman;
pub mod error;
pub mod experiment;
pub mod io;
pub mod optim;
pub mod pinn;
pub mod saddle;
pub mod seeding;
pub mod synthetic;

pub use error::{Error, Result};
