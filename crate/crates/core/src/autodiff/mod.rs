//! Differentiation for small dense networks.
//!
//! Parameter gradients come from a reverse pass over a recorded forward pass.
//! Input derivatives up to second order are carried forward as hyper-dual
//! channels (value, first and second directional derivatives) through the same
//! recorded pass, so a single backward sweep also differentiates PDE residuals
//! built from `u`, `du/dx_j` and `d2u/dx_j dx_k` with respect to the weights.

mod dual;
mod fd;
mod mlp;
mod tape;

pub use dual::HyperDual;
pub use fd::{central_gradient, fd_check};
pub use mlp::{Activation, Mlp};
pub use tape::{grad_params, input_derivatives, Deriv, DerivRequest, Jets, Tape};
