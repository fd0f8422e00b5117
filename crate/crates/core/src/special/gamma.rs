use crate::error::{domain, Result};

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite x > 0, got {x}"));
    }
    if (x - 1.0).abs() < NEAR_ROOT {
        return Ok(ln_gamma_1p(x - 1.0));
    }
    if (x - 2.0).abs() < NEAR_ROOT {
        let e = x - 2.0;
        return Ok(ln_gamma_1p(e) + e.ln_1p());
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

const NEAR_ROOT: f64 = 0.2;

// ln Γ(1 + e) = -γ e + sum_{k>=2} (-1)^k ζ(k) e^k / k
const LN_GAMMA_1P: [f64; 30] = [
    -0.577215664901532860606512090082402431,
    0.822467033424113218236,
    -0.400685634386531428467,
    0.270580808427784547879,
    -0.207385551028673985266,
    0.169557176997408189952,
    -0.14404989676884611812,
    0.125509669524743042422,
    -0.111334265869564690491,
    0.100099457512781808534,
    -0.0909540171458290422326,
    0.0833538405461090040249,
    -0.0769325164113521914728,
    0.0714329462953613360592,
    -0.0666687058824204680329,
    0.062500955141213040742,
    -0.058823978658684582339,
    0.0555557676274036111022,
    -0.0526316793796166607336,
    0.0500000476981016936398,
    -0.0476190703301422279908,
    0.0454545562932046694424,
    -0.0434782660530402593614,
    0.0416666691503412104691,
    -0.0400000011921401405861,
    0.0384615390346751857063,
    -0.0370370373129893255495,
    0.0357142858473333580282,
    -0.0344827586849193008108,
    0.0333333333643775810807,
];

// Taylor series of ln Γ(1 + e), |e| < 0.2, keeping full relative accuracy
// next to the roots of ln Γ at 1 and 2.
fn ln_gamma_1p(e: f64) -> f64 {
    LN_GAMMA_1P.iter().rev().fold(0.0, |acc, c| (acc + c) * e)
}

/// `ln B(a, b)` for positive shapes.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`, with `(a)_0 = 1`.
pub fn rising_factorial(a: f64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

// Tail of the Stirling series for ln Γ(z), i.e. ln Γ(z) minus its leading terms.
fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln Γ(x + w) − ln Γ(x)` for `x > 0`, `x + w > 0`.
///
/// For large `x` the difference is formed from the Stirling series so that
/// no cancellation between two huge log-gamma values takes place; this keeps
/// the result accurate for `x` up to ~1e300.
pub fn ln_gamma_ratio(x: f64, w: f64) -> f64 {
    const STIRLING_FROM: f64 = 32.0;
    if w == 0.0 {
        return 0.0;
    }
    if x >= STIRLING_FROM && x + w >= STIRLING_FROM {
        let y = x + w;
        (x - 0.5) * (w / x).ln_1p() + w * y.ln() - w + stirling_tail(y) - stirling_tail(x)
    } else {
        statrs::function::gamma::ln_gamma(x + w) - statrs::function::gamma::ln_gamma(x)
    }
}
