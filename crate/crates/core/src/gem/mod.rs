//! The GEM(alpha, theta) random distribution: stick-breaking cut points,
//! exchangeable samples, and three constructions of the sample maximum.

mod construct;
mod sticks;
mod walk;

pub use construct::{
    max_via_paintbox, max_via_paintbox_with, max_via_poisson, max_via_stickbreak, n_theta_at_beta,
    poisson_spacings, sample_exchangeable, sample_max, summarize, Construction, PaintboxConfig,
    SampleSummary,
};
pub(crate) use walk::Locator;
pub use sticks::{CutPoints, HazardSequence, StickStream, DEFAULT_STICK_CAP};

use crate::error::{domain, Result};

/// Parameters of GEM(alpha, theta): `0 <= alpha < 1`, `theta > -alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GemParams {
    alpha: f64,
    theta: f64,
}

impl GemParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !theta.is_finite() {
            return domain(format!("GEM parameters must be finite, got alpha={alpha}, theta={theta}"));
        }
        if !(0.0..1.0).contains(&alpha) {
            return domain(format!("GEM requires 0 <= alpha < 1, got alpha={alpha}"));
        }
        if theta <= -alpha {
            return domain(format!(
                "GEM requires theta > -alpha (theta > 0 when alpha = 0), got alpha={alpha}, theta={theta}"
            ));
        }
        Ok(Self { alpha, theta })
    }

    /// One-parameter GEM(theta).
    pub fn one_parameter(theta: f64) -> Result<Self> {
        Self::new(0.0, theta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Shapes `(1 - alpha, theta + i alpha)` of the i-th stick (i >= 1).
    pub fn stick_shapes(&self, i: u64) -> (f64, f64) {
        (1.0 - self.alpha, self.theta + i as f64 * self.alpha)
    }

    /// Parameters of the residual sequence after `k` sticks.
    pub fn shifted(&self, k: u64) -> Self {
        Self { alpha: self.alpha, theta: self.theta + k as f64 * self.alpha }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_parameters() {
        assert!(GemParams::new(0.0, 1.0).is_ok());
        assert!(GemParams::new(0.5, -0.49).is_ok());
        assert!(GemParams::new(0.0, 0.0).is_err());
        assert!(GemParams::new(1.0, 1.0).is_err());
        assert!(GemParams::new(-0.1, 1.0).is_err());
        assert!(GemParams::new(0.3, -0.3).is_err());
        assert!(GemParams::new(0.3, f64::NAN).is_err());
    }

    #[test]
    fn stick_shapes_are_index_dependent() {
        let p = GemParams::new(0.5, 0.5).unwrap();
        assert_eq!(p.stick_shapes(1), (0.5, 1.0));
        assert_eq!(p.stick_shapes(3), (0.5, 2.0));
        assert_eq!(p.shifted(2).theta(), 1.5);
    }
}
