//! Sample maxima of exchangeable samples from the GEM(alpha, theta) random
//! discrete distribution: samplers, exact finite-n laws, limit laws, tie
//! statistics and the goodness-of-fit machinery used to cross-check them.

pub mod acceptance;
pub mod campaign;
pub mod error;
pub mod exact;
pub mod gem;
pub mod limit;
pub mod randkit;
pub mod special;
pub mod stats;
pub mod tables;
pub mod ties;

pub use error::{Error, Result};
pub use gem::GemParams;
