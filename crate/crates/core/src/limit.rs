//! Large-n laws: the CLT scaling for alpha = 0, moments of the alpha-diversity
//! `D = lim K_n / n^alpha`, and the limit cdf of `M_n / n^{alpha/(1-alpha)}`
//! for alpha > 0, `E exp(-alpha D^{1/alpha} x^{-(1-alpha)/alpha})`.
//!
//! The limit cdf has no convergent moment series (the moments of
//! `D^{1/alpha}` grow too fast), so it is evaluated either by quadrature of a
//! Bessel integral or, at alpha = 1/2, in closed form. A Monte Carlo mixture
//! over simulated diversity draws gives an independent route.

use std::fmt;
use std::str::FromStr;

use crate::campaign::par_replicas;
use crate::error::{domain, Error, Result};
use crate::gem::{max_via_stickbreak, GemParams};
use crate::special::{bessel_j, bessel_j_zero_hint, integrate_oscillatory, log_gamma, QuadratureConfig};

/// Law of the alpha-diversity, `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityLaw {
    params: GemParams,
}

impl DiversityLaw {
    pub fn new(params: GemParams) -> Result<Self> {
        if params.alpha() <= 0.0 {
            return domain("the diversity is defined for alpha > 0");
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> GemParams {
        self.params
    }
}

/// `E D^p = Γ(θ+1)/Γ(θ/α+1) · Γ(p+θ/α+1)/Γ(pα+θ+1)` for `p > -1 - θ/α`.
pub fn diversity_moment(law: DiversityLaw, p: f64) -> Result<f64> {
    let (a, t) = (law.params.alpha(), law.params.theta());
    if !p.is_finite() || p <= -1.0 - t / a {
        return domain(format!("diversity moment needs p > -1 - theta/alpha = {}, got {p}", -1.0 - t / a));
    }
    let ln = log_gamma(t + 1.0)? - log_gamma(t / a + 1.0)? + log_gamma(p + t / a + 1.0)? - log_gamma(p * a + t + 1.0)?;
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMethod {
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

impl CdfMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CdfMethod::Quadrature => "quadrature",
            CdfMethod::ClosedForm => "closedform",
            CdfMethod::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for CdfMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CdfMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(CdfMethod::Quadrature),
            "closedform" => Ok(CdfMethod::ClosedForm),
            "mc" => Ok(CdfMethod::MonteCarlo),
            other => Err(Error::Parse(format!("unknown cdf method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCdfPoint {
    pub x: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub method: CdfMethod,
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("x must be finite and > 0, got {x}"));
    }
    Ok(())
}

/// Supported envelope of [`limit_cdf_quadrature`]. Below alpha = 0.2 the
/// integrand decays like `exp(-c v^{0.4})` or slower and the segment count
/// needed for certification grows beyond reach.
pub const QUADRATURE_ALPHA_RANGE: (f64, f64) = (0.2, 0.95);
pub const QUADRATURE_THETA_MAX: f64 = 10.0;

/// Limit cdf at `x` from
/// `2 α^{1-θ-α} Γ(θ+1)/Γ(θ/α+1) x^{(1-α)(θ/α+1)} ∫_0^∞ v^{θ+2α-1} exp(-(v²/α)^α x^{1-α}) J_θ(2v) dv`.
///
/// The reported value is clipped to [0, 1]; `error_estimate <= tol`.
pub fn limit_cdf_quadrature(params: GemParams, x: f64, tol: f64) -> Result<LimitCdfPoint> {
    let (a, t) = (params.alpha(), params.theta());
    let (lo, hi) = QUADRATURE_ALPHA_RANGE;
    if !(lo..=hi).contains(&a) || t > QUADRATURE_THETA_MAX {
        return Err(Error::UnsupportedRange(format!(
            "quadrature is certified for alpha in [{lo}, {hi}] and theta <= {QUADRATURE_THETA_MAX}, got alpha={a}, theta={t}"
        )));
    }
    check_x(x)?;
    if !(tol > 0.0) {
        return domain(format!("tol must be > 0, got {tol}"));
    }
    let ln_pref = 2f64.ln() + (1.0 - t - a) * a.ln() + log_gamma(t + 1.0)? - log_gamma(t / a + 1.0)?
        + (1.0 - a) * (t / a + 1.0) * x.ln();
    let pref = ln_pref.exp();
    let rate = x.powf(1.0 - a);
    let power = t + 2.0 * a - 1.0;
    let f = |v: f64| -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let damp = (-(v * v / a).powf(a) * rate).exp();
        if damp == 0.0 {
            return 0.0;
        }
        v.powf(power) * damp * bessel_j(t, 2.0 * v).unwrap_or(f64::NAN)
    };
    // sign changes of J_θ(2v) sit near half the zeros of J_θ
    let hints = (1..).map(move |k| 0.5 * bessel_j_zero_hint(t, k));
    let r = integrate_oscillatory(f, hints, tol / pref, QuadratureConfig::default())?;
    if !r.value.is_finite() {
        return Err(Error::AccuracyNotMet(format!("non-finite quadrature at alpha={a}, theta={t}, x={x}")));
    }
    Ok(LimitCdfPoint {
        x,
        value: (pref * r.value).clamp(0.0, 1.0),
        error_estimate: pref * r.abs_error_estimate,
        method: CdfMethod::Quadrature,
    })
}

/// Alpha = 1/2 closed form `(x / (x + 2))^{θ + 1/2}`.
pub fn limit_cdf_closedform_half(theta: f64, x: f64) -> Result<LimitCdfPoint> {
    GemParams::new(0.5, theta)?;
    check_x(x)?;
    Ok(LimitCdfPoint {
        x,
        value: (x / (x + 2.0)).powf(theta + 0.5),
        error_estimate: 0.0,
        method: CdfMethod::ClosedForm,
    })
}

/// `(m - θ ln n) / sqrt(θ ln n)`.
pub fn clt_normalize(theta: f64, n: u64, m: u64) -> Result<f64> {
    GemParams::one_parameter(theta)?;
    if n < 2 {
        return domain("clt_normalize needs n >= 2");
    }
    let centre = theta * (n as f64).ln();
    Ok((m as f64 - centre) / centre.sqrt())
}

/// Per-replica `K_n / n^α`, approximate draws of the diversity.
pub fn estimate_diversity(params: GemParams, n: u64, reps: u64, master_seed: u64) -> Result<Vec<f64>> {
    DiversityLaw::new(params)?;
    let scale = (n as f64).powf(params.alpha());
    par_replicas(reps, master_seed, |key| Ok(max_via_stickbreak(params, n, key)?.distinct_count as f64 / scale))
}

/// `mean_d exp(-α d^{1/α} x^{-(1-α)/α})` over diversity draws.
pub fn frechet_mixture_cdf_mc(params: GemParams, x: f64, draws: &[f64]) -> Result<f64> {
    DiversityLaw::new(params)?;
    check_x(x)?;
    if draws.is_empty() {
        return Err(Error::InsufficientData("no diversity draws".into()));
    }
    let a = params.alpha();
    let y = a * x.powf(-(1.0 - a) / a);
    Ok(draws.iter().map(|d| (-y * d.powf(1.0 / a)).exp()).sum::<f64>() / draws.len() as f64)
}

/// [`frechet_mixture_cdf_mc`] as a table point; the error estimate is the
/// standard error of the mixture average.
pub fn frechet_mixture_point(params: GemParams, x: f64, draws: &[f64]) -> Result<LimitCdfPoint> {
    let value = frechet_mixture_cdf_mc(params, x, draws)?;
    let a = params.alpha();
    let y = a * x.powf(-(1.0 - a) / a);
    let second = draws.iter().map(|d| (-2.0 * y * d.powf(1.0 / a)).exp()).sum::<f64>() / draws.len() as f64;
    let se = ((second - value * value).max(0.0) / draws.len() as f64).sqrt();
    Ok(LimitCdfPoint { x, value, error_estimate: se, method: CdfMethod::MonteCarlo })
}
