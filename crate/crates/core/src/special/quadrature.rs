//! Semi-infinite quadrature for slowly decaying oscillatory integrands.
//!
//! The half line is cut at caller-supplied sign-change hints. Each segment
//! is integrated with adaptive Gauss-Kronrod (7/15). The first segment is
//! split geometrically towards the origin so integrable power singularities
//! are handled. Segment integrals are summed; if they alternate in sign the
//! partial sums are accelerated with iterated Aitken extrapolation.
//!
//! Segment rules run at a fixed internal tolerance, so the sequence of error
//! estimates does not depend on the requested tolerance. Tightening `tol`
//! therefore never yields a larger reported error.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub segments_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub max_segments: usize,
    /// Segments required before convergence may be declared.
    pub min_segments: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { max_segments: 20_000, min_segments: 6 }
    }
}

const SEGMENT_ABS_TOL: f64 = 1e-17;
const SEGMENT_REL_TOL: f64 = 1e-14;
const MAX_BISECTION_DEPTH: u32 = 40;
const ORIGIN_PIECES: usize = 4000;

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx) + f(centre + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * half, ((resk - resg) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> (f64, f64) {
    let (whole, err) = gk15(f, a, b);
    if err <= SEGMENT_ABS_TOL.max(SEGMENT_REL_TOL * whole.abs()) || depth >= MAX_BISECTION_DEPTH {
        return (whole, err);
    }
    let mid = 0.5 * (a + b);
    let (l, el) = adaptive(f, a, mid, depth + 1);
    let (r, er) = adaptive(f, mid, b, depth + 1);
    (l + r, el + er)
}

// ∫_0^b f, cutting [0, b] at b/2, b/4, ... until the pieces are negligible.
fn origin_segment<F: Fn(f64) -> f64>(f: &F, b: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut hi = b;
    let mut prev_piece = f64::INFINITY;
    for _ in 0..ORIGIN_PIECES {
        let lo = 0.5 * hi;
        let (piece, e) = adaptive(f, lo, hi, 0);
        sum += piece;
        err += e;
        let ratio = if prev_piece.is_finite() && prev_piece != 0.0 {
            (piece / prev_piece).abs()
        } else {
            1.0
        };
        prev_piece = piece;
        hi = lo;
        // geometric tail of the remaining pieces
        if ratio < 0.99 {
            let tail = piece.abs() * ratio / (1.0 - ratio);
            if tail <= SEGMENT_ABS_TOL.max(SEGMENT_REL_TOL * sum.abs()) {
                return (sum, err + tail);
            }
        }
        if piece == 0.0 && hi < 1e-300 {
            break;
        }
    }
    // the remaining piece [0, hi] bounded by the last piece size
    (sum, err + prev_piece.abs())
}

fn aitken_iterated(partials: &[f64]) -> Vec<f64> {
    let mut level: Vec<f64> = partials.to_vec();
    while level.len() >= 3 {
        let mut next = Vec::with_capacity(level.len() - 2);
        for w in level.windows(3) {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let denom = d2 - d1;
            if denom == 0.0 || !denom.is_finite() {
                next.push(w[2]);
            } else {
                next.push(w[2] - d2 * d2 / denom);
            }
        }
        if next.len() < 3 {
            return next;
        }
        level = next;
    }
    level
}

fn alternating(segments: &[f64]) -> bool {
    let tail = &segments[segments.len().saturating_sub(4)..];
    tail.len() >= 3
        && tail.windows(2).all(|w| w[0] != 0.0 && w[1] != 0.0 && (w[0] > 0.0) != (w[1] > 0.0))
}

/// `∫_0^∞ f(v) dv` for integrands whose sign changes sit near the
/// (strictly increasing) `zero_hints`.
///
/// Returns [`Error::NonConvergence`] if the tolerance cannot be met within
/// `config.max_segments` segments.
pub fn integrate_oscillatory<F, I>(
    f: F,
    zero_hints: I,
    tol: f64,
    config: QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
    I: IntoIterator<Item = f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("integrate_oscillatory: tol must be > 0, got {tol}")));
    }
    let mut hints = zero_hints.into_iter();
    let first = match hints.next() {
        Some(h) if h > 0.0 && h.is_finite() => h,
        _ => return Err(Error::Domain("integrate_oscillatory: first zero hint must be > 0".into())),
    };
    let (head, head_err) = origin_segment(&f, first);

    let mut segments: Vec<f64> = Vec::new();
    let mut partials: Vec<f64> = vec![head];
    let mut quad_err = head_err;
    let mut left = first;
    let mut best = (head, f64::INFINITY);
    let mut history: Vec<f64> = Vec::new();

    for (count, right) in hints.enumerate() {
        if !(right > left) || !right.is_finite() {
            return Err(Error::Domain(format!(
                "integrate_oscillatory: zero hints must be strictly increasing ({left} then {right})"
            )));
        }
        let (seg, e) = adaptive(&f, left, right, 0);
        quad_err += e;
        segments.push(seg);
        partials.push(partials.last().unwrap() + seg);
        left = right;
        let used = count + 1;

        if used >= config.min_segments {
            let (estimate, trunc) = if alternating(&segments) {
                // accelerate the most recent partial sums
                let window = &partials[partials.len().saturating_sub(24)..];
                let acc = aitken_iterated(window);
                let last = *acc.last().unwrap();
                history.push(last);
                let n = history.len();
                let spread = if n >= 3 {
                    (history[n - 1] - history[n - 2]).abs() + (history[n - 1] - history[n - 3]).abs()
                } else {
                    f64::INFINITY
                };
                (last, spread)
            } else {
                history.clear();
                let n = segments.len();
                let a = segments[n - 1].abs();
                let b = segments[n - 2].abs();
                let tail = if a == 0.0 {
                    0.0
                } else if a < b {
                    let r = a / b;
                    a * r / (1.0 - r)
                } else {
                    f64::INFINITY
                };
                (*partials.last().unwrap(), tail)
            };
            let total_err = trunc + quad_err;
            if total_err < best.1 {
                best = (estimate, total_err);
            }
            if total_err <= tol {
                return Ok(QuadratureResult {
                    value: estimate,
                    abs_error_estimate: total_err,
                    segments_used: used,
                    converged: true,
                });
            }
        }
        if used >= config.max_segments {
            return Err(Error::NonConvergence { segments: used, error: best.1 });
        }
    }
    Err(Error::NonConvergence { segments: segments.len(), error: best.1 })
}
