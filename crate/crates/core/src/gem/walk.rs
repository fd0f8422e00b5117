use std::cmp::Ordering;

use crate::error::Result;
use crate::randkit::{beta_pair, ln_gamma_variate, Stream};

use super::sticks::CutPoints;
use super::GemParams;

/// Partial sums `G_k` of i.i.d. Gamma(`shape`) increments, realised lazily
/// and only where first-passage queries need them. Unvisited stretches are
/// filled in with gamma bridges (`(G_m - G_l) / (G_h - G_l)` is Beta).
#[derive(Debug, Clone)]
pub(crate) struct GammaWalk {
    shape: f64,
    pos: u64,
    value: f64,
    prev: f64,
    // realised points beyond `pos`, farthest first
    ahead: Vec<(u64, f64)>,
    rng: Stream,
}

impl GammaWalk {
    pub(crate) fn new(shape: f64, rng: Stream) -> Self {
        Self { shape, pos: 0, value: 0.0, prev: f64::NEG_INFINITY, ahead: Vec::new(), rng }
    }

    pub(crate) fn pos(&self) -> u64 {
        self.pos
    }

    fn gamma(&mut self, steps: u64) -> f64 {
        ln_gamma_variate(self.shape * steps as f64, &mut self.rng).exp()
    }

    /// `min{k >= 1 : G_k > level}`. Successive calls must have
    /// non-decreasing answers, i.e. `level >= G_{pos-1}`.
    pub(crate) fn first_passage(&mut self, level: f64) -> u64 {
        debug_assert!(level >= self.prev);
        if self.pos >= 1 && self.value > level {
            return self.pos;
        }
        let mut lo = (self.pos, self.value);
        let mut hi = loop {
            match self.ahead.last() {
                Some(&(k, v)) if v <= level => {
                    lo = (k, v);
                    self.ahead.pop();
                }
                Some(&a) => break a,
                None => {
                    let mut step = 1u64;
                    loop {
                        let k = lo.0 + step;
                        let v = lo.1 + self.gamma(step);
                        if v > level {
                            self.ahead.push((k, v));
                            break;
                        }
                        lo = (k, v);
                        step = step.saturating_mul(2);
                    }
                }
            }
        };
        while hi.0 - lo.0 > 1 {
            let mid = lo.0 + (hi.0 - lo.0) / 2;
            let (b, _) = beta_pair(self.shape * (mid - lo.0) as f64, self.shape * (hi.0 - mid) as f64, &mut self.rng);
            let v = lo.1 + (hi.1 - lo.1) * b;
            if v > level {
                hi = (mid, v);
                self.ahead.push(hi);
            } else {
                lo = (mid, v);
            }
        }
        self.ahead.pop();
        self.pos = hi.0;
        self.value = hi.1;
        self.prev = lo.1;
        hi.0
    }

    /// Position of `min{k : G_k > level}` relative to the current frontier.
    pub(crate) fn compare(&self, level: f64) -> Ordering {
        if self.pos == 0 || level >= self.value {
            Ordering::Greater
        } else if level >= self.prev {
            Ordering::Equal
        } else {
            Ordering::Less
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    // alpha = 0: R_k = exp(-Γ_k / theta), Γ a walk of Exp(1) steps
    Exponential { theta: f64, walk: GammaWalk },
    // alpha = 1/2: R_k = Z_1 / (Z_1 + G_k), G a walk of Gamma(1/2) steps
    Half { z1: f64, walk: GammaWalk },
    Sticks { cuts: CutPoints, frontier: usize },
}

/// Forward locator of sample values `X = min{k : R_k < W}` for tail
/// coordinates `W = 1 - U` supplied as `ln W`, in non-increasing order.
///
/// For alpha in {0, 1/2} the residual sequence is a monotone function of a
/// gamma random walk, so each new value costs O(log X) variates. Other alphas
/// enumerate sticks.
#[derive(Debug, Clone)]
pub(crate) struct Locator {
    inner: Inner,
}

impl Locator {
    pub(crate) fn new(params: GemParams, mut rng: Stream, stick_cap: u64) -> Self {
        let inner = if params.alpha() == 0.0 {
            Inner::Exponential { theta: params.theta(), walk: GammaWalk::new(1.0, rng) }
        } else if params.alpha() == 0.5 {
            let z1 = ln_gamma_variate(params.theta() + 0.5, &mut rng).exp();
            Inner::Half { z1, walk: GammaWalk::new(0.5, rng) }
        } else {
            Inner::Sticks { cuts: CutPoints::with_cap(params, rng, stick_cap), frontier: 0 }
        };
        Self { inner }
    }

    fn level(&self, ln_w: f64) -> f64 {
        match &self.inner {
            Inner::Exponential { theta, .. } => -theta * ln_w,
            // Z_1 (1 - W) / W
            Inner::Half { z1, .. } => z1 * (-ln_w).exp_m1(),
            Inner::Sticks { .. } => unreachable!(),
        }
    }

    /// Value of the sample with tail coordinate `exp(ln_w)`; `ln_w` must not
    /// exceed any previously located one.
    pub(crate) fn locate(&mut self, ln_w: f64) -> Result<u64> {
        match &mut self.inner {
            Inner::Sticks { cuts, frontier } => {
                let x = cuts.locate(ln_w.exp())?;
                *frontier = x as usize;
                Ok(x)
            }
            _ => {
                let level = self.level(ln_w);
                match &mut self.inner {
                    Inner::Exponential { walk, .. } | Inner::Half { walk, .. } => Ok(walk.first_passage(level)),
                    Inner::Sticks { .. } => unreachable!(),
                }
            }
        }
    }

    /// `ln R_x` for the last located value `x` (0 before any call).
    pub(crate) fn frontier_ln_residual(&self) -> f64 {
        match &self.inner {
            Inner::Exponential { theta, walk } => -walk.value / theta,
            Inner::Half { z1, walk } => -(walk.value / z1).ln_1p(),
            Inner::Sticks { cuts, frontier } => {
                if *frontier == 0 {
                    0.0
                } else {
                    cuts.residuals()[*frontier - 1].ln()
                }
            }
        }
    }

    /// Last located value (0 before any call).
    pub(crate) fn frontier(&self) -> u64 {
        match &self.inner {
            Inner::Exponential { walk, .. } | Inner::Half { walk, .. } => walk.pos(),
            Inner::Sticks { frontier, .. } => *frontier as u64,
        }
    }

    /// Compares the value of a sample at `ln_w` with the frontier, without
    /// drawing anything.
    pub(crate) fn compare(&self, ln_w: f64) -> Ordering {
        match &self.inner {
            Inner::Exponential { walk, .. } | Inner::Half { walk, .. } => walk.compare(self.level(ln_w)),
            Inner::Sticks { cuts, frontier } => {
                if *frontier == 0 {
                    return Ordering::Greater;
                }
                let w = ln_w.exp();
                let r = cuts.residuals();
                let below = r[*frontier - 1];
                let above = if *frontier >= 2 { r[*frontier - 2] } else { 1.0 };
                if w <= below {
                    Ordering::Greater
                } else if w <= above {
                    Ordering::Equal
                } else {
                    Ordering::Less
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit::StreamKey;

    #[test]
    fn first_passage_matches_explicit_walk_in_law() {
        // P[first passage of an Exp(1) walk over L exceeds k] = P[Poisson(L) >= k]
        let level = 3.0;
        let reps = 40_000;
        let mut hist = [0usize; 12];
        for r in 0..reps {
            let mut w = GammaWalk::new(1.0, StreamKey::new(11, r, 0).stream());
            let k = w.first_passage(level) as usize;
            hist[(k - 1).min(11)] += 1;
        }
        // first passage k means Poisson count of arrivals <= L equals k - 1
        let mut pmf = (-level).exp();
        for (j, &c) in hist.iter().enumerate().take(8) {
            let p = c as f64 / reps as f64;
            let sd = (pmf * (1.0 - pmf) / reps as f64).sqrt();
            assert!((p - pmf).abs() < 5.0 * sd + 1e-4, "k={} {p} vs {pmf}", j + 1);
            pmf *= level / (j + 1) as f64;
        }
    }

    #[test]
    fn successive_passages_are_monotone_and_consistent() {
        let mut w = GammaWalk::new(0.5, StreamKey::new(12, 0, 0).stream());
        let mut last = 0;
        for level in [0.1, 0.1, 2.0, 2.5, 40.0, 40.0, 1e6] {
            let k = w.first_passage(level);
            assert!(k >= last);
            assert!(w.value > level && w.prev <= level);
            assert_eq!(w.compare(level), Ordering::Equal);
            assert_eq!(w.compare(w.value), Ordering::Greater);
            last = k;
        }
        // 1e6 / E[Gamma(1/2)] = 2e6 steps, give or take a few thousand
        assert!((last as f64 - 2e6).abs() < 2e4, "{last}");
    }

    #[test]
    fn walk_and_stick_locators_agree_in_law() {
        // X for W = 1/2 under alpha = 1/2: walk representation vs enumerated sticks
        let params = GemParams::new(0.5, 1.0).unwrap();
        let reps = 20_000;
        let mut a = vec![0usize; 6];
        let mut b = vec![0usize; 6];
        for r in 0..reps {
            let mut fast = Locator::new(params, StreamKey::new(13, r, 0).stream(), 1_000_000);
            let mut cuts = CutPoints::new(params, StreamKey::new(14, r, 0).stream());
            a[(fast.locate(0.5f64.ln()).unwrap() as usize - 1).min(5)] += 1;
            b[(cuts.locate(0.5).unwrap() as usize - 1).min(5)] += 1;
        }
        for k in 0..6 {
            let (pa, pb) = (a[k] as f64 / reps as f64, b[k] as f64 / reps as f64);
            let sd = (pa.max(pb) * 2.0 / reps as f64).sqrt();
            assert!((pa - pb).abs() < 5.0 * sd + 1e-3, "k={} {pa} vs {pb}", k + 1);
        }
    }
}
