//! Bessel function of the first kind for real order `nu > -1` and real
//! argument `x >= 0`.
//!
//! Three evaluation routes:
//! - ascending power series for `x <= 12`;
//! - Hankel large-argument expansion beyond that, accepted only when its
//!   smallest term certifies the tolerance;
//! - otherwise Miller backward recurrence normalised by the Neumann
//!   identity `(x/2)^mu = sum_k (mu + 2k) Γ(mu + k) / k! J_{mu+2k}(x)`,
//!   evaluated from two starting orders and cross-checked.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const SERIES_MAX_X: f64 = 12.0;
const HANKEL_TERM_TOL: f64 = 1e-16;
const MILLER_AGREEMENT: f64 = 1e-12;

/// `J_nu(x)` for `nu > -1`, `x >= 0`.
///
/// Orders in `(-1, 0)` are accepted (the series converges for any real
/// order when `x > 0`); accuracy there has only been checked against
/// half-integer closed forms.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !nu.is_finite() || nu <= -1.0 {
        return domain(format!("bessel_j: order must be finite and > -1, got {nu}"));
    }
    if !x.is_finite() || x < 0.0 {
        return domain(format!("bessel_j: argument must be finite and >= 0, got {x}"));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            domain("bessel_j: negative order is unbounded at x = 0")
        };
    }
    if x <= SERIES_MAX_X {
        return Ok(power_series(nu, x));
    }
    if let Some(v) = hankel(nu, x) {
        return Ok(v);
    }
    miller(nu, x)
}

fn power_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let lead = nu * half.ln() - statrs::function::gamma::ln_gamma(nu + 1.0);
    let mut term = lead.exp();
    let mut sum = term;
    let q = -half * half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    let mut k = 1.0f64;
    loop {
        let odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        if term == 0.0 {
            break;
        }
        if term.abs() > prev {
            // asymptotic series began to diverge before reaching the tolerance
            return None;
        }
        // a_k / x^k contributes with sign pattern (+,-) to P on even k and Q on odd k
        let kk = k as u64;
        let sign = if (kk / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if kk % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < HANKEL_TERM_TOL {
            break;
        }
        prev = term.abs();
        k += 1.0;
        if k > 200.0 {
            return None;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

fn miller(nu: f64, x: f64) -> Result<f64> {
    let top = (x.max(nu) + 40.0 + 4.0 * x.sqrt()).ceil() as usize;
    let a = miller_from(nu, x, top);
    let b = miller_from(nu, x, top + 24);
    if (a - b).abs() > MILLER_AGREEMENT {
        return Err(Error::AccuracyNotMet(format!(
            "bessel_j({nu}, {x}): backward recurrence unstable ({a} vs {b})"
        )));
    }
    Ok(b)
}

fn miller_from(nu: f64, x: f64, top: usize) -> f64 {
    // base order in [0, 1); the target is base + shift with shift >= -1
    let base = nu - nu.floor();
    let shift = nu.floor() as i64;
    // start on an even offset so that every base + 2k order is visited
    let top = top + (top % 2);

    let mut upper = 0.0f64; // f_{m+1}
    let mut cur = 1e-300f64; // f_m
    let mut norm = 0.0f64;
    let mut target = if shift == top as i64 { cur } else { 0.0 };
    let mut m = top;
    loop {
        if m % 2 == 0 {
            norm += neumann_weight(base, (m / 2) as u64) * cur;
        }
        if m as i64 == shift {
            target = cur;
        }
        if m == 0 {
            break;
        }
        let order = base + m as f64;
        let lower = 2.0 * order / x * cur - upper;
        upper = cur;
        cur = lower;
        m -= 1;
        if cur.abs() > 1e250 {
            upper *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    if shift == -1 {
        // cur = f_base, upper = f_{base+1}
        target = 2.0 * base / x * cur - upper;
    }
    target * (0.5 * x).powf(base) / norm
}

fn neumann_weight(base: f64, k: u64) -> f64 {
    if k == 0 {
        return statrs::function::gamma::gamma(base + 1.0);
    }
    let k = k as f64;
    let ln = statrs::function::gamma::ln_gamma(base + k) - statrs::function::gamma::ln_gamma(k + 1.0);
    (base + 2.0 * k) * ln.exp()
}

/// McMahon approximation of the k-th positive zero (k >= 1) of `J_nu`.
pub fn bessel_j_zero_hint(nu: f64, k: usize) -> f64 {
    (k as f64 + 0.5 * nu - 0.25) * PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_integer(order2: i32, x: f64) -> f64 {
        let s = (2.0 / (PI * x)).sqrt();
        match order2 {
            -1 => s * x.cos(),
            1 => s * x.sin(),
            3 => s * (x.sin() / x - x.cos()),
            5 => s * ((3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x),
            _ => unreachable!(),
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
        let v = bessel_j(0.5, PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(-1.0, 1.0).is_err());
        assert!(bessel_j(0.0, -1.0).is_err());
        assert!(bessel_j(-0.5, 0.0).is_err());
    }

    #[test]
    fn half_integer_closed_forms_across_switchover() {
        let mut x = 0.25;
        while x <= 200.0 {
            for order2 in [-1, 1, 3, 5] {
                let nu = order2 as f64 / 2.0;
                let got = bessel_j(nu, x).unwrap();
                let want = half_integer(order2, x);
                assert!((got - want).abs() < 1e-10, "nu={nu} x={x}: {got} vs {want}");
            }
            x += if x < 20.0 { 0.05 } else { 0.37 };
        }
    }

    #[test]
    fn reference_values() {
        // mpmath besselj, 20 digits
        let cases = [
            (0.0, 1.0, 0.76519768655796655145),
            (1.0, 1.0, 0.44005058574493351596),
            (0.0, 50.0, 0.055812327669251815005),
            (2.5, 13.0, -0.13767085904841080367),
            (12.0, 13.0, 0.26153687541034509911),
            (12.0, 30.0, 0.14825335109966010021),
            (7.3, 20.0, -0.17439710031283123753),
            (0.3, 150.0, -0.030246391350782191486),
            (5.0, 200.0, -0.055132678944014677614),
            (0.5, 12.5, -0.014967249458668382989),
            (11.5, 40.0, -0.087904250883849926895),
            (-0.25, 0.5, 1.0595995935275231736),
            (-0.25, 20.0, 0.13015401042690348416),
            (3.7, 11.9, 0.21708355575322527587),
            (3.7, 12.1, 0.22908369687452139314),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() < 1e-10, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn three_term_recurrence() {
        let mut nu = 0.5;
        while nu <= 5.0 {
            let mut x = 0.5;
            while x <= 50.0 {
                let lo = bessel_j(nu - 1.0, x).unwrap();
                let mid = bessel_j(nu, x).unwrap();
                let hi = bessel_j(nu + 1.0, x).unwrap();
                let resid = lo + hi - 2.0 * nu / x * mid;
                assert!(resid.abs() <= 1e-9, "nu={nu} x={x} resid={resid}");
                x += 0.5;
            }
            nu += 0.5;
        }
    }

    #[test]
    fn miller_agrees_with_series_and_hankel() {
        for &(nu, x) in &[(0.0, 8.0), (2.3, 11.0), (0.7, 60.0), (9.0, 100.0)] {
            let m = miller(nu, x).unwrap();
            let direct = if x <= SERIES_MAX_X { power_series(nu, x) } else { hankel(nu, x).unwrap() };
            assert!((m - direct).abs() < 1e-11, "nu={nu} x={x}: {m} vs {direct}");
        }
    }
}
