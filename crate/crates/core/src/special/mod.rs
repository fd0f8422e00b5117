//! Special-function kernels: log-gamma and friends, real-order Bessel J,
//! and semi-infinite quadrature of oscillatory integrands.

mod bessel;
mod gamma;
mod quadrature;

pub use bessel::{bessel_j, bessel_j_zero_hint};
pub use gamma::{ln_beta, ln_gamma_ratio, log_gamma, rising_factorial};
pub use quadrature::{integrate_oscillatory, QuadratureConfig, QuadratureResult};
