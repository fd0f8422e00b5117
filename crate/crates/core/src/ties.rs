//! Multiplicity of the maximum, `L_n = #{j <= n : X_j = M_n}`.
//!
//! `limsup L_n` is governed by the hazards `H_i`: it equals `ℓ` a.s. exactly
//! when `Σ H_i^ℓ` diverges and `Σ H_i^{ℓ+1}` converges. Convergence of a
//! random series cannot be read off a finite prefix, so the classifier works
//! from the analytic decay of the moments `E H_i^k`, and simulation is used
//! only for finite-n ordering checks.

use std::cmp::Ordering;
use std::fmt;

use crate::campaign::par_replicas;
use crate::error::{domain, Result};
use crate::gem::{GemParams, Locator, DEFAULT_STICK_CAP};
use crate::randkit::{uniform01, Lane};
use crate::special::ln_gamma_ratio;

/// `E H_i^k = B(1-α+k, θ+iα) / B(1-α, θ+iα)` for the `i`-th hazard.
pub fn hazard_moment(params: GemParams, i: u64, k: u64) -> Result<f64> {
    if i == 0 || k == 0 {
        return domain(format!("hazard_moment needs i, k >= 1, got i={i}, k={k}"));
    }
    let a = 1.0 - params.alpha();
    let s = a + params.theta() + i as f64 * params.alpha();
    Ok(if k <= 64 {
        (0..k).map(|m| (a + m as f64) / (s + m as f64)).product()
    } else {
        (ln_gamma_ratio(a, k as f64) - ln_gamma_ratio(s, k as f64)).exp()
    })
}

/// Decay of the hazard moments in `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayModel {
    /// `E H_i^k` does not depend on `i`.
    Constant,
    /// `E H_i^k ≍ i^{-rate k}`.
    Power { rate: f64 },
}

impl DecayModel {
    /// GEM moments: constant in `i` for alpha = 0, otherwise
    /// `E H_i^k ~ Γ(1-α+k)/Γ(1-α) (iα)^{-k}`.
    pub fn for_gem(params: GemParams) -> Self {
        if params.alpha() == 0.0 {
            DecayModel::Constant
        } else {
            DecayModel::Power { rate: 1.0 }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    Converges,
    Diverges,
}

/// Whether `Σ_i E H_i^ℓ` converges under `model`.
pub fn classify_series(model: DecayModel, ell: u32) -> Result<SeriesVerdict> {
    if ell == 0 {
        return domain("classify_series needs ell >= 1");
    }
    match model {
        DecayModel::Constant => Ok(SeriesVerdict::Diverges),
        DecayModel::Power { rate } if rate.is_finite() && rate > 0.0 => Ok(if rate * ell as f64 > 1.0 {
            SeriesVerdict::Converges
        } else {
            SeriesVerdict::Diverges
        }),
        DecayModel::Power { rate } => domain(format!("unsupported decay rate {rate}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimsupVerdict {
    Equals(u32),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieClassification {
    pub verdict: LimsupVerdict,
    pub basis: String,
}

impl fmt::Display for TieClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            LimsupVerdict::Equals(l) => write!(f, "limsup L_n = {l} a.s."),
            LimsupVerdict::Infinite => write!(f, "limsup L_n = ∞ a.s."),
        }
    }
}

// past this order a power decay rate > 1/ELL_MAX would still be missed
const ELL_MAX: u32 = 64;

/// `limsup L_n`: the least `ℓ` with `Σ H^ℓ = ∞` and `Σ H^{ℓ+1} < ∞`.
pub fn classify_limsup(params: GemParams) -> TieClassification {
    let model = DecayModel::for_gem(params);
    for ell in 1..ELL_MAX {
        let here = classify_series(model, ell).expect("GEM decay models are supported");
        let next = classify_series(model, ell + 1).expect("GEM decay models are supported");
        if here == SeriesVerdict::Diverges && next == SeriesVerdict::Converges {
            return TieClassification {
                verdict: LimsupVerdict::Equals(ell),
                basis: format!("Σ E H_i^{ell} = ∞ and Σ E H_i^{} < ∞ (three-series)", ell + 1),
            };
        }
    }
    TieClassification { verdict: LimsupVerdict::Infinite, basis: "Σ E H_i^k = ∞ for all k".into() }
}

pub const TIE_CHECKPOINTS: [u64; 4] = [10, 100, 1_000, 10_000];

/// Running maximum of `L_m` over `m <= n`, recorded at checkpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TiePath {
    pub replica: u64,
    /// `(n, max_{m<=n} L_m)`, increasing in `n`.
    pub checkpoints: Vec<(u64, u64)>,
}

impl TiePath {
    pub fn at(&self, n: u64) -> Option<u64> {
        self.checkpoints.iter().find(|c| c.0 == n).map(|c| c.1)
    }
}

fn checkpoints(n_max: u64) -> Vec<u64> {
    let mut c: Vec<u64> = TIE_CHECKPOINTS.iter().copied().filter(|&n| n < n_max).collect();
    c.push(n_max);
    c
}

/// Sequential samples `X_1, X_2, ...` for each replica, tracking `L_n`.
pub fn simulate_tie_paths(params: GemParams, n_max: u64, reps: u64, master_seed: u64) -> Result<Vec<TiePath>> {
    if n_max == 0 {
        return domain("simulate_tie_paths needs n_max >= 1");
    }
    let marks = checkpoints(n_max);
    par_replicas(reps, master_seed, |key| {
        let mut loc = Locator::new(params, key.stream(Lane::Sticks), DEFAULT_STICK_CAP);
        let mut rng = key.stream(Lane::Sample);
        let (mut ties, mut running) = (0u64, 0u64);
        let mut out = Vec::with_capacity(marks.len());
        let mut next = marks.iter().peekable();
        for n in 1..=n_max {
            let ln_w = uniform01(&mut rng).ln();
            match loc.compare(ln_w) {
                Ordering::Greater => {
                    let before = loc.frontier();
                    let x = loc.locate(ln_w)?;
                    debug_assert!(x > before);
                    ties = 1;
                }
                Ordering::Equal => ties += 1,
                Ordering::Less => {}
            }
            debug_assert!((1..=n).contains(&ties));
            running = running.max(ties);
            if next.peek() == Some(&&n) {
                out.push((n, running));
                next.next();
            }
        }
        Ok(TiePath { replica: key.replica_index, checkpoints: out })
    })
}

/// Fraction of paths whose running max at `n` is at least `level`.
pub fn fraction_at_least(paths: &[TiePath], n: u64, level: u64) -> f64 {
    let hits = paths.iter().filter(|p| p.at(n).is_some_and(|v| v >= level)).count();
    hits as f64 / paths.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::log_gamma;

    fn gem(a: f64, t: f64) -> GemParams {
        GemParams::new(a, t).unwrap()
    }

    #[test]
    fn hazard_moment_examples() {
        for i in [1, 2, 10, 1000] {
            assert!((hazard_moment(gem(0.0, 1.0), i, 1).unwrap() - 0.5).abs() < 1e-15);
            let a = hazard_moment(gem(0.0, 2.5), i, 3).unwrap();
            assert!((a - hazard_moment(gem(0.0, 2.5), 1, 3).unwrap()).abs() < 1e-15);
        }
        let p = gem(0.5, 0.5);
        let asym = (log_gamma(2.5).unwrap() - log_gamma(0.5).unwrap()).exp() * (100.0f64 / 2.0).powi(-2);
        let r = hazard_moment(p, 100, 2).unwrap() / asym;
        assert!((r - 2500.0 / (51.0 * 52.0)).abs() < 1e-13, "{r}");
        // relative error ~ 3/(iα)
        for (i, tol) in [(200u64, 0.05), (1_000, 0.01), (100_000, 1e-4)] {
            let asym = 0.75 * (i as f64 / 2.0).powi(-2);
            let r = hazard_moment(p, i, 2).unwrap() / asym;
            assert!((r - 1.0).abs() < tol, "i={i}: {r}");
        }
        assert!(hazard_moment(p, 0, 1).is_err());
        // product and log-gamma branches meet
        let lo = hazard_moment(p, 7, 64).unwrap().ln();
        let hi = hazard_moment(p, 7, 65).unwrap().ln();
        let step = ((0.5 + 64.0) / (0.5 + 0.5 + 3.5 + 64.0) as f64).ln();
        assert!((hi - lo - step).abs() < 1e-9);
    }

    #[test]
    fn classifier_verdicts_on_a_grid() {
        assert_eq!(classify_limsup(gem(0.5, 1.0)).verdict, LimsupVerdict::Equals(1));
        assert_eq!(classify_limsup(gem(0.0, 1.0)).verdict, LimsupVerdict::Infinite);
        assert_eq!(classify_limsup(gem(0.0, 100.0)).verdict, LimsupVerdict::Infinite);
        assert_eq!(classify_limsup(gem(0.5, 1.0)).to_string(), "limsup L_n = 1 a.s.");
        assert_eq!(classify_limsup(gem(0.0, 1.0)).to_string(), "limsup L_n = ∞ a.s.");
        for a in [0.05, 0.3, 0.9] {
            for t in [-0.5 * a, 0.0, 3.0] {
                assert_eq!(classify_limsup(gem(a, t)).verdict, LimsupVerdict::Equals(1));
            }
        }
    }

    #[test]
    fn series_verdicts() {
        let p = DecayModel::for_gem(gem(0.4, 1.0));
        assert_eq!(classify_series(p, 1).unwrap(), SeriesVerdict::Diverges);
        assert_eq!(classify_series(p, 2).unwrap(), SeriesVerdict::Converges);
        for ell in 1..6 {
            assert_eq!(classify_series(DecayModel::Constant, ell).unwrap(), SeriesVerdict::Diverges);
        }
        assert!(classify_series(DecayModel::Power { rate: -1.0 }, 1).is_err());
        assert!(classify_series(p, 0).is_err());
    }

    #[test]
    fn single_step_paths() {
        let paths = simulate_tie_paths(gem(0.3, 1.0), 1, 50, 2).unwrap();
        assert!(paths.iter().all(|p| p.checkpoints == vec![(1, 1)]));
    }

    #[test]
    fn running_max_is_monotone_and_bounded() {
        for p in [gem(0.0, 1.0), gem(0.5, 1.0), gem(0.3, 0.5)] {
            for path in simulate_tie_paths(p, 2_000, 40, 9).unwrap() {
                let n: Vec<u64> = path.checkpoints.iter().map(|c| c.0).collect();
                assert_eq!(n, vec![10, 100, 1_000, 2_000]);
                assert!(path.checkpoints.windows(2).all(|w| w[0].1 <= w[1].1));
                assert!(path.checkpoints.iter().all(|&(n, l)| 1 <= l && l <= n));
            }
        }
    }

    #[test]
    fn small_n_tie_law() {
        // n = 2, alpha = 0, theta = 1: L_2 = 2 iff X_1 = X_2, probability
        // Σ E p_k^2 = 1/(1+θ) = 1/2
        let paths = simulate_tie_paths(gem(0.0, 1.0), 2, 20_000, 4).unwrap();
        let f = fraction_at_least(&paths, 2, 2);
        assert!((f - 0.5).abs() < 5.0 * (0.25f64 / 20_000.0).sqrt(), "{f}");
        // alpha = 1/2, theta = 1: Σ E p_k^2 = (1-α)/(1+θ) = 1/4
        let paths = simulate_tie_paths(gem(0.5, 1.0), 2, 20_000, 4).unwrap();
        let f = fraction_at_least(&paths, 2, 2);
        assert!((f - 0.25).abs() < 5.0 * (0.1875f64 / 20_000.0).sqrt(), "{f}");
    }
}
