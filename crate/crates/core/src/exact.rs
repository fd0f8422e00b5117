//! Exact finite-n laws of the sample maximum: convolutions of independent
//! geometrics, probability generating functions and moments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::gem::GemParams;
use crate::randkit::geometric_unchecked;
use crate::special::ln_gamma_ratio;

/// Success parameters `tau_i` of independent geometrics on {0, 1, ...}.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomSumSpec {
    taus: Vec<f64>,
}

impl GeomSumSpec {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return domain(format!("geometric success parameters must lie in (0, 1), got {t}"));
        }
        Ok(Self { taus })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }
}

/// `tau_i = i / (theta + i)`, `i = 1..n`: `M_n - 1` is the sum of the
/// corresponding geometrics.
pub fn taus_for_max(theta: f64, n: u64) -> Result<GeomSumSpec> {
    GemParams::one_parameter(theta)?;
    #[cfg(not(feature = "mutant-tau"))]
    let tau = |i: f64| i / (theta + i);
    #[cfg(feature = "mutant-tau")]
    let tau = |i: f64| i / (theta + i + 0.5);
    GeomSumSpec::new((1..=n).map(|i| tau(i as f64)).collect())
}

/// `tau_i = (b + i - 1) / (b + i - 1 + theta)`, `i = 1..n`: the law of the
/// alpha = 0 cut-point count at an independent `Beta(n, b)` point.
pub fn taus_for_beta_mixed(theta: f64, b: f64, n: u64) -> Result<GeomSumSpec> {
    GemParams::one_parameter(theta)?;
    if !(b > 0.0) || !b.is_finite() {
        return domain(format!("b must be finite and > 0, got {b}"));
    }
    GeomSumSpec::new(
        (1..=n)
            .map(|i| {
                let s = b + i as f64 - 1.0;
                s / (s + theta)
            })
            .collect(),
    )
}

/// Probability vector on `offset, offset + 1, ...` with the mass beyond the
/// last point kept explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    pub offset: u64,
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

impl DiscretePmf {
    pub fn new(offset: u64, probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || !(tail_mass >= 0.0) {
            return domain("pmf entries and tail mass must be finite and >= 0");
        }
        Ok(Self { offset, probs, tail_mass })
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        self.probs.get((k - self.offset) as usize).copied().unwrap_or(0.0)
    }

    /// Largest support point held explicitly.
    pub fn last(&self) -> u64 {
        self.offset + self.probs.len().saturating_sub(1) as u64
    }

    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (self.offset + i as u64, p))
    }

    pub fn total(&self) -> f64 {
        neumaier(self.probs.iter().copied())
    }

    /// The same law moved by `shift` (e.g. from `M_n - 1` to `M_n`).
    pub fn shifted(&self, shift: u64) -> Self {
        Self { offset: self.offset + shift, ..self.clone() }
    }

    pub fn cdf(&self, k: u64) -> f64 {
        neumaier(self.support().take_while(|(j, _)| *j <= k).map(|(_, p)| p))
    }

    fn central_moment(&self, order: i32, mean: f64) -> f64 {
        neumaier(self.support().map(|(k, p)| p * (k as f64 - mean).powi(order)))
    }

    pub fn mean(&self) -> f64 {
        neumaier(self.support().map(|(k, p)| p * k as f64))
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(2, self.mean())
    }

    pub fn skewness(&self) -> f64 {
        let m = self.mean();
        self.central_moment(3, m) / self.central_moment(2, m).powf(1.5)
    }

    /// `sum_k p_k z^k` over the explicit support.
    pub fn pgf(&self, z: f64) -> f64 {
        neumaier(self.support().map(|(k, p)| p * z.powf(k as f64)))
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(mean, variance)` of the sum: `sum (1 - tau)/tau` and `sum (1 - tau)/tau^2`.
pub fn exact_mean_var(spec: &GeomSumSpec) -> (f64, f64) {
    let mean = neumaier(spec.taus.iter().map(|t| (1.0 - t) / t));
    let var = neumaier(spec.taus.iter().map(|t| (1.0 - t) / (t * t)));
    (mean, var)
}

// Chernoff bound on P[S > m]: inf_s E e^{sS} e^{-s(m+1)}, log scale.
fn ln_chernoff_tail(spec: &GeomSumSpec, m: f64) -> f64 {
    let q_max = spec.taus.iter().map(|t| 1.0 - t).fold(0.0, f64::max);
    if q_max == 0.0 {
        return f64::NEG_INFINITY;
    }
    let s_max = -q_max.ln();
    let f = |s: f64| -> f64 {
        let ln_mgf: f64 = spec.taus.iter().map(|t| t.ln() - (-(1.0 - t) * s.exp()).ln_1p()).sum();
        ln_mgf - s * (m + 1.0)
    };
    // golden-section search on (0, s_max); f is convex
    let (mut a, mut b) = (0.0, s_max * (1.0 - 1e-12));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).min(0.0)
}

/// Law of `G_1 + ... + G_n` on {0, 1, ...}, kept up to the point where the
/// certified remaining mass drops below `tail_eps`.
pub fn convolve_geometrics(spec: &GeomSumSpec, tail_eps: f64) -> Result<DiscretePmf> {
    if !(tail_eps > 0.0 && tail_eps <= 0.01) {
        return domain(format!("tail_eps must lie in (0, 0.01], got {tail_eps}"));
    }
    let (mean, var) = exact_mean_var(spec);
    let mut bound = (mean + 12.0 * var.sqrt()).ceil().max(1.0);
    let ln_eps = tail_eps.ln();
    while ln_chernoff_tail(spec, bound) >= ln_eps {
        bound = (bound * 1.25).ceil();
        if bound > 1e8 {
            return Err(Error::CapExceeded { cap: 100_000_000, what: "convolution support" });
        }
    }
    let len = bound as usize + 1;
    let mut probs = vec![0.0; len];
    probs[0] = 1.0;
    for &tau in &spec.taus {
        let q = 1.0 - tau;
        let mut prev = 0.0;
        for p in probs.iter_mut() {
            let v = tau * *p + q * prev;
            *p = v;
            prev = v;
        }
    }
    let tail_mass = (1.0 - neumaier(probs.iter().copied())).max(0.0);
    // trailing zeros carry no information
    while probs.len() > 1 && *probs.last().unwrap() == 0.0 {
        probs.pop();
    }
    DiscretePmf::new(0, probs, tail_mass)
}

/// Exact draw of `G_1 + ... + G_n`.
pub fn sample_geom_sum<R: Rng + ?Sized>(spec: &GeomSumSpec, rng: &mut R) -> u64 {
    spec.taus.iter().map(|&t| geometric_unchecked(t, rng)).sum()
}

fn check_z(z: f64, closed: bool) -> Result<()> {
    let ok = if closed { (0.0..=1.0).contains(&z) } else { (0.0..1.0).contains(&z) };
    if !ok {
        return domain(format!("z out of range: {z}"));
    }
    Ok(())
}

/// `E z^{M_n} / z = prod_{i=1..n} i / (i + theta (1 - z))`, the generating
/// function of `M_n - 1` for alpha = 0.
pub fn pgf_product(theta: f64, n: u64, z: f64) -> Result<f64> {
    GemParams::one_parameter(theta)?;
    check_z(z, true)?;
    let s = theta * (1.0 - z);
    Ok((1..=n).map(|i| i as f64 / (i as f64 + s)).product())
}

/// [`pgf_product`] in exact rational arithmetic.
pub fn pgf_product_exact(theta: &BigRational, n: u64, z: &BigRational) -> BigRational {
    let s = theta * (BigRational::one() - z);
    let mut acc = BigRational::one();
    for i in 1..=n {
        let i = BigRational::from_integer(BigInt::from(i));
        acc = acc * &i / (&i + &s);
    }
    acc
}

/// `E (1 - H_i)^j = (theta + i alpha)_j / (theta + (i-1) alpha + 1)_j`.
pub fn beta_stick_moment(params: GemParams, i: u64, j: u64) -> f64 {
    let a = params.theta() + i as f64 * params.alpha();
    let b = params.theta() + (i as f64 - 1.0) * params.alpha() + 1.0;
    if j <= 64 {
        (0..j).map(|m| (a + m as f64) / (b + m as f64)).product()
    } else {
        (ln_gamma_ratio(a, j as f64) - ln_gamma_ratio(b, j as f64)).exp()
    }
}

/// Generating series `sum_{k>=1} E (1 - Y_k)^j z^{k-1}` for `j >= 1`, summed
/// until the geometric tail bound falls below 1e-17 of the partial sum.
pub fn inner_series(params: GemParams, j: u64, z: f64, k_max: u64) -> Result<f64> {
    check_z(z, false)?;
    if j == 0 {
        return Ok(1.0 / (1.0 - z));
    }
    let mut term = 1.0;
    let mut parts = Vec::new();
    for k in 1..=k_max {
        term *= beta_stick_moment(params, k, j) * if k > 1 { z } else { 1.0 };
        parts.push(term);
        // moments increase towards 1 in i, so later ratios are at most z
        let sum = neumaier(parts.iter().copied());
        if term * z / (1.0 - z) <= 1e-17 * sum || term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::AccuracyNotMet(format!("inner series needs more than k_max={k_max} terms (j={j}, z={z})")))
}

const CANCELLATION_BUDGET: f64 = 1e12;

fn binomial_row(n: u64) -> Vec<f64> {
    let mut row = vec![1.0f64; n as usize + 1];
    for j in 1..=n as usize {
        row[j] = row[j - 1] * (n as f64 - j as f64 + 1.0) / j as f64;
    }
    row
}

/// Floating evaluation of the alternating-sum representation
/// `(1 - z) sum_{j=0..n} C(n, j) (-1)^j sum_{k>=1} E (1 - Y_k)^j z^{k-1}`
/// of `E z^{M_n - 1}`, valid for every alpha.
pub fn pgf_alternating(params: GemParams, n: u64, z: f64, k_max: u64) -> Result<f64> {
    check_z(z, false)?;
    let binom = binomial_row(n);
    let mut terms = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binom[j as usize] * (1.0 - z) * inner_series(params, j, z, k_max)?);
    }
    let value = neumaier(terms.iter().copied());
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    let condition = magnitude / value.abs();
    if !(condition < CANCELLATION_BUDGET) {
        return Err(Error::Precision { condition });
    }
    Ok(value)
}

/// Exact rational alternating sum for alpha = 0, where the inner series is
/// `theta / (j + theta (1 - z))` (and `1 / (1 - z)` for `j = 0`).
pub fn pgf_alternating_exact(theta: &BigRational, n: u64, z: &BigRational) -> Result<BigRational> {
    if *theta <= BigRational::zero() {
        return domain("theta must be > 0");
    }
    if *z < BigRational::zero() || *z >= BigRational::one() {
        return domain("z must lie in [0, 1)");
    }
    let one_minus = BigRational::one() - z;
    let mut acc = BigRational::zero();
    let mut binom = BigInt::one();
    for j in 0..=n {
        let inner = if j == 0 {
            BigRational::one() / &one_minus
        } else {
            theta / (BigRational::from_integer(BigInt::from(j)) + theta * &one_minus)
        };
        let term = BigRational::from_integer(binom.clone()) * inner;
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    Ok(acc * one_minus)
}

/// Convenience: rational from a float that is exactly representable.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit::StreamKey;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn two_term_convolution() {
        let pmf = convolve_geometrics(&taus_for_max(1.0, 2).unwrap(), 1e-12).unwrap();
        assert!((pmf.prob(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((pmf.total() + pmf.tail_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_geometric_is_dyadic() {
        let pmf = convolve_geometrics(&GeomSumSpec::new(vec![0.5]).unwrap(), 1e-12).unwrap();
        for k in 0..30 {
            assert!((pmf.prob(k) - 0.5f64.powi(k as i32 + 1)).abs() < 1e-16);
        }
        assert!(pmf.tail_mass < 1e-12);
    }

    #[test]
    fn convolution_mean_is_harmonic() {
        let spec = taus_for_max(1.0, 10).unwrap();
        let pmf = convolve_geometrics(&spec, 1e-15).unwrap();
        let h10: f64 = (1..=10).map(|i| 1.0 / i as f64).sum();
        assert!((pmf.mean() - h10).abs() < 1e-10);
        assert!((h10 - 2.9289682540).abs() < 1e-10);
        let (m, v) = exact_mean_var(&spec);
        assert!((pmf.mean() - m).abs() < 1e-9 && (pmf.variance() - v).abs() < 1e-9);
    }

    #[test]
    fn small_mean_var_cases() {
        assert_eq!(exact_mean_var(&taus_for_max(1.0, 1).unwrap()), (1.0, 2.0));
        let (m, _) = exact_mean_var(&taus_for_max(1.0, 3).unwrap());
        assert!((m - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn beta_mixture_with_b_one_is_the_maximum() {
        for &theta in &[0.3, 1.0, 7.5] {
            for n in [1, 5, 40] {
                assert_eq!(taus_for_beta_mixed(theta, 1.0, n).unwrap(), taus_for_max(theta, n).unwrap());
            }
        }
    }

    #[test]
    fn product_pgf_examples() {
        assert_eq!(pgf_product(1.0, 5, 1.0).unwrap(), 1.0);
        assert_eq!(pgf_product(1.0, 1, 0.0).unwrap(), 0.5);
        assert!((pgf_product(2.0, 3, 0.5).unwrap() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn pmf_pgf_matches_product() {
        let pmf = convolve_geometrics(&taus_for_max(5.0, 12).unwrap(), 1e-13).unwrap();
        for z in [0.1, 0.5, 0.9] {
            assert!((pmf.pgf(z) - pgf_product(5.0, 12, z).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn stick_moments() {
        let p = GemParams::new(0.5, 0.5).unwrap();
        assert_eq!(beta_stick_moment(p, 3, 0), 1.0);
        assert!((beta_stick_moment(p, 1, 1) - 2.0 / 3.0).abs() < 1e-16);
        let p0 = GemParams::new(0.0, 2.0).unwrap();
        for i in 1..5 {
            assert!((beta_stick_moment(p0, i, 3) - 2.0 / 5.0).abs() < 1e-15);
        }
        // large-j route continues the small-j product
        let big = beta_stick_moment(p, 4, 65);
        let direct: f64 = (0..65).map(|m| (2.5 + m as f64) / (3.0 + m as f64)).product();
        assert!((big / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_parameter_inner_series_closed_form() {
        for &theta in &[0.5, 1.0, 5.0] {
            let p = GemParams::one_parameter(theta).unwrap();
            for j in 1..8 {
                for z in [0.0, 0.3, 0.9] {
                    let got = inner_series(p, j, z, 100_000).unwrap();
                    let want = theta / (j as f64 + theta * (1.0 - z));
                    assert!((got - want).abs() < 1e-12, "theta={theta} j={j} z={z}");
                }
            }
        }
    }

    #[test]
    fn alternating_at_zero_is_first_atom_probability() {
        for &(a, t) in &[(0.0, 1.0), (0.5, 0.5), (0.3, -0.2), (0.8, 4.0)] {
            let p = GemParams::new(a, t).unwrap();
            let v = pgf_alternating(p, 1, 0.0, 1000).unwrap();
            assert!((v - (1.0 - a) / (1.0 + t)).abs() < 1e-14);
        }
    }

    #[test]
    fn alternating_equals_product_for_one_parameter() {
        for &theta in &[0.5, 1.0, 5.0] {
            let p = GemParams::one_parameter(theta).unwrap();
            for n in 1..=12 {
                for zi in 1..=9 {
                    let z = zi as f64 / 10.0;
                    let a = pgf_alternating(p, n, z, 1_000_000).unwrap();
                    let b = pgf_product(theta, n, z).unwrap();
                    assert!((a - b).abs() < 1e-10, "theta={theta} n={n} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn exact_alternating_identity() {
        for theta in [q(1, 2), q(1, 1), q(5, 1)] {
            for n in 0..=12 {
                for zi in 1..=9 {
                    let z = q(zi, 10);
                    assert_eq!(pgf_alternating_exact(&theta, n, &z).unwrap(), pgf_product_exact(&theta, n, &z));
                }
            }
        }
    }

    #[test]
    fn cancellation_budget_is_enforced() {
        let p = GemParams::new(0.5, 1.0).unwrap();
        let err = pgf_alternating(p, 80, 0.5, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::Precision { .. }));
    }

    #[test]
    fn geometric_sum_sampler_mean() {
        let spec = taus_for_beta_mixed(0.5, 0.5, 10).unwrap();
        let (mean, var) = exact_mean_var(&spec);
        let mut rng = StreamKey::new(31, 0, 0).stream();
        let reps = 200_000;
        let total: u64 = (0..reps).map(|_| sample_geom_sum(&spec, &mut rng)).sum();
        let got = total as f64 / reps as f64;
        assert!((got - mean).abs() < 4.0 * (var / reps as f64).sqrt());
    }

    #[test]
    fn unimodal_pmf() {
        for &theta in &[0.5, 1.0, 5.0, 20.0] {
            let pmf = convolve_geometrics(&taus_for_max(theta, 50).unwrap(), 1e-14).unwrap();
            let peak = pmf.probs.iter().enumerate().fold(0, |b, (i, &p)| if p > pmf.probs[b] { i } else { b });
            assert!(pmf.probs[..=peak].windows(2).all(|w| w[0] <= w[1]));
            assert!(pmf.probs[peak..].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GeomSumSpec::new(vec![0.5, 1.0]).is_err());
        assert!(convolve_geometrics(&taus_for_max(1.0, 3).unwrap(), 0.5).is_err());
        assert!(taus_for_beta_mixed(1.0, 0.0, 3).is_err());
        assert!(pgf_product(1.0, 3, 1.5).is_err());
    }
}
