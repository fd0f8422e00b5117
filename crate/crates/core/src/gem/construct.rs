use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution};

use crate::error::{domain, Error, Result};
use crate::randkit::{beta_pair, exp1, poisson_count, uniform01, Lane, ReplicaKey};

use super::sticks::{CutPoints, DEFAULT_STICK_CAP};
use super::walk::Locator;
use super::GemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Stickbreak,
    Paintbox,
    Poisson,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Stickbreak => "stickbreak",
            Construction::Paintbox => "paintbox",
            Construction::Poisson => "poisson",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stickbreak" => Ok(Construction::Stickbreak),
            "paintbox" => Ok(Construction::Paintbox),
            "poisson" => Ok(Construction::Poisson),
            other => Err(Error::Parse(format!("unknown construction '{other}'"))),
        }
    }
}

/// Per-replica record: `M_n`, `K_n` (distinct values) and `L_n` (values tied
/// with the maximum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: u64,
    pub max_value: u64,
    pub distinct_count: u64,
    pub tie_count: u64,
    pub construction: Construction,
    pub key: ReplicaKey,
}

impl SampleSummary {
    fn check(self) -> Self {
        debug_assert!(self.tie_count >= 1 && self.tie_count <= self.n);
        debug_assert!(self.distinct_count >= 1 && self.distinct_count <= self.n);
        debug_assert!(self.max_value >= self.distinct_count);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PaintboxConfig {
    pub stick_cap: u64,
}

impl Default for PaintboxConfig {
    fn default() -> Self {
        Self { stick_cap: DEFAULT_STICK_CAP }
    }
}

fn require_n(n: u64) -> Result<()> {
    if n == 0 {
        return domain("sample size n must be >= 1");
    }
    Ok(())
}

/// `X_1..X_n`, conditionally i.i.d. given one stick-breaking realisation,
/// with `X = min{k : Y_k > U}`. The first `m` values of a size-`n` draw equal
/// the size-`m` draw for the same key.
pub fn sample_exchangeable(params: GemParams, n: u64, key: ReplicaKey) -> Result<Vec<u64>> {
    require_n(n)?;
    let mut cuts = CutPoints::new(params, key.stream(Lane::Sticks));
    let mut rng = key.stream(Lane::Sample);
    (0..n)
        .map(|_| {
            let u = uniform01(&mut rng);
            cuts.locate(1.0 - u)
        })
        .collect()
}

/// Stick-breaking construction. Order statistics of the uniforms are
/// located smallest `U` first; once a value `x` is found, the remaining
/// uniforms in the same interval are counted with one binomial draw.
pub fn max_via_stickbreak(params: GemParams, n: u64, key: ReplicaKey) -> Result<SampleSummary> {
    require_n(n)?;
    let mut loc = Locator::new(params, key.stream(Lane::Sticks), DEFAULT_STICK_CAP);
    let mut rng = key.stream(Lane::Sample);
    let (mut last, mut distinct, mut ties) = (0u64, 0u64, 0u64);
    // the `left` unplaced tail coordinates are i.i.d. uniform on (0, e^ln_w)
    let (mut left, mut ln_w) = (n, 0.0f64);
    while left > 0 {
        ln_w -= exp1(&mut rng) / left as f64;
        left -= 1;
        let x = loc.locate(ln_w)?;
        if x == last {
            // only reachable through rounding when ln_w sits on ln R_last
            ties += 1;
        } else {
            last = x;
            distinct += 1;
            ties = 1;
        }
        let ln_r = loc.frontier_ln_residual();
        let same = binomial(left, -(ln_r - ln_w).exp_m1(), &mut rng);
        ties += same;
        left -= same;
        ln_w = ln_r;
    }
    Ok(SampleSummary {
        n,
        max_value: last,
        distinct_count: distinct,
        tie_count: ties,
        construction: Construction::Stickbreak,
        key,
    }
    .check())
}

fn binomial(trials: u64, p: f64, rng: &mut crate::randkit::Stream) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p).expect("p in (0, 1)").sample(rng)
}

/// `M_n` alone, by locating only the largest uniform (`U_{n,n} = V^{1/n}`).
pub fn sample_max(params: GemParams, n: u64, key: ReplicaKey) -> Result<u64> {
    require_n(n)?;
    let mut loc = Locator::new(params, key.stream(Lane::Sticks), DEFAULT_STICK_CAP);
    let mut rng = key.stream(Lane::Sample);
    let ln_v = -exp1(&mut rng) / n as f64;
    loc.locate((-ln_v.exp_m1()).ln())
}

/// Paintbox construction. The points `V` arrive as a unit-rate Poisson
/// process, so interval `i` is first hit at an `Exp(p_i)` time. `M_n` counts
/// the intervals discovered up to (and including) the last discovery of an
/// interval holding some `U_j`.
pub fn max_via_paintbox(params: GemParams, n: u64, key: ReplicaKey) -> Result<SampleSummary> {
    max_via_paintbox_with(params, n, key, PaintboxConfig::default())
}

pub fn max_via_paintbox_with(
    params: GemParams,
    n: u64,
    key: ReplicaKey,
    config: PaintboxConfig,
) -> Result<SampleSummary> {
    require_n(n)?;
    let mut cuts = CutPoints::with_cap(params, key.stream(Lane::Sticks), config.stick_cap);
    let mut rng = key.stream(Lane::Sample);
    let mut disc = key.stream(Lane::Discovery);

    // occupied intervals, ascending, with multiplicities
    let mut occupied: Vec<(usize, u64)> = Vec::new();
    let (mut left, mut ln_w) = (n, 0.0f64);
    while left > 0 {
        ln_w -= exp1(&mut rng) / left as f64;
        left -= 1;
        let x = cuts.locate(ln_w.exp())? as usize;
        let ln_r = cuts.residuals()[x - 1].ln();
        let same = 1 + binomial(left, -(ln_r - ln_w).exp_m1(), &mut rng);
        left -= same - 1;
        ln_w = ln_r;
        match occupied.last_mut() {
            Some((k, c)) if *k == x => *c += same,
            _ => occupied.push((x, same)),
        }
    }
    let head = occupied.last().unwrap().0;

    let times: Vec<f64> = (1..=head).map(|i| exp1(&mut disc) / cuts.prob(i)).collect();
    let (mut horizon, mut tie_count) = (f64::NEG_INFINITY, 0);
    for &(k, c) in &occupied {
        if times[k - 1] > horizon {
            horizon = times[k - 1];
            tie_count = c;
        }
    }
    let mut discovered = times.iter().filter(|&&t| t <= horizon).count() as u64;

    // unoccupied intervals beyond `head`: hits on mass R_head over [0, horizon]
    let rest = cuts.residuals()[head - 1];
    let hits = poisson_count(horizon * rest, &mut disc);
    if hits > config.stick_cap as f64 {
        return Err(Error::CapExceeded { cap: config.stick_cap, what: "paintbox tail discoveries" });
    }
    let hits = hits as u64;
    let mut last = head as u64;
    let mut ln_v = 0.0;
    for left in (1..=hits).rev() {
        ln_v -= exp1(&mut disc) / left as f64;
        let x = cuts.locate(rest * ln_v.exp())?;
        if x != last {
            discovered += 1;
            last = x;
        }
    }

    Ok(SampleSummary {
        n,
        max_value: discovered,
        distinct_count: occupied.len() as u64,
        tie_count,
        construction: Construction::Paintbox,
        key,
    }
    .check())
}

/// Exponential-time construction for alpha = 0: with `T_i = -theta ln(1 - U_i)`
/// and unit-rate arrivals `gamma_k`, `X_i - 1` counts arrivals at or below `T_i`.
pub fn max_via_poisson(theta: f64, n: u64, key: ReplicaKey) -> Result<SampleSummary> {
    GemParams::one_parameter(theta)?;
    require_n(n)?;
    let mut rng = key.stream(Lane::Sample);
    let mut times: Vec<f64> = (0..n).map(|_| -theta * (-uniform01(&mut rng)).ln_1p()).collect();
    times.sort_by(f64::total_cmp);

    let mut arrivals = key.stream(Lane::Sticks);
    let mut next = exp1(&mut arrivals);
    let mut count = 0u64;
    let (mut last, mut distinct, mut ties) = (0u64, 0u64, 0u64);
    for &t in &times {
        while next <= t {
            count += 1;
            next += exp1(&mut arrivals);
        }
        let x = count + 1;
        if x == last {
            ties += 1;
        } else {
            last = x;
            distinct += 1;
            ties = 1;
        }
    }
    Ok(SampleSummary {
        n,
        max_value: last,
        distinct_count: distinct,
        tie_count: ties,
        construction: Construction::Poisson,
        key,
    }
    .check())
}

/// Spacings of the ordered exponential times `T_{n,n-i+1} - T_{n,n-i}`,
/// `i = 1..n` (with `T_{n,0} = 0`); the i-th has mean `theta / i`.
pub fn poisson_spacings(theta: f64, n: u64, key: ReplicaKey) -> Result<Vec<f64>> {
    GemParams::one_parameter(theta)?;
    require_n(n)?;
    let mut rng = key.stream(Lane::Sample);
    let mut times: Vec<f64> = (0..n).map(|_| -theta * (-uniform01(&mut rng)).ln_1p()).collect();
    times.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n as usize);
    for i in (0..times.len()).rev() {
        let below = if i == 0 { 0.0 } else { times[i - 1] };
        out.push(times[i] - below);
    }
    Ok(out)
}

/// `N_theta(beta)`: number of alpha = 0 cut points at or below an independent
/// `beta ~ Beta(n, b)`.
pub fn n_theta_at_beta(theta: f64, n: u64, b: f64, key: ReplicaKey) -> Result<u64> {
    GemParams::one_parameter(theta)?;
    require_n(n)?;
    if !(b > 0.0) || !b.is_finite() {
        return domain(format!("b must be finite and > 0, got {b}"));
    }
    let mut rng = key.stream(Lane::Sample);
    let (_, one_minus) = beta_pair(n as f64, b, &mut rng);
    let horizon = -theta * one_minus.ln();
    let mut arrivals = key.stream(Lane::Sticks);
    let mut t = exp1(&mut arrivals);
    let mut count = 0;
    while t <= horizon {
        count += 1;
        t += exp1(&mut arrivals);
    }
    Ok(count)
}

/// Dispatches one replica to the requested construction.
pub fn summarize(construction: Construction, params: GemParams, n: u64, key: ReplicaKey) -> Result<SampleSummary> {
    match construction {
        Construction::Stickbreak => max_via_stickbreak(params, n, key),
        Construction::Paintbox => max_via_paintbox(params, n, key),
        Construction::Poisson => {
            if params.alpha() != 0.0 {
                return domain(format!(
                    "the poisson construction requires alpha = 0, got alpha={}",
                    params.alpha()
                ));
            }
            max_via_poisson(params.theta(), n, key)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(seed: u64, r: u64) -> ReplicaKey {
        ReplicaKey::new(seed, r)
    }

    #[test]
    fn first_value_is_one_with_beta_mean_probability() {
        let reps = 1_000_000u64;
        let params = GemParams::new(0.0, 1.0).unwrap();
        let ones = (0..reps).filter(|&r| sample_exchangeable(params, 1, key(21, r)).unwrap()[0] == 1).count();
        let p = ones as f64 / reps as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / reps as f64).sqrt() + 1e-6, "{p}");
    }

    #[test]
    fn values_are_positive_and_prefix_stable() {
        let params = GemParams::new(0.3, 1.5).unwrap();
        let long = sample_exchangeable(params, 200, key(22, 0)).unwrap();
        let short = sample_exchangeable(params, 50, key(22, 0)).unwrap();
        assert_eq!(&long[..50], &short[..]);
        assert!(long.iter().all(|&x| x >= 1));
    }

    #[test]
    fn degenerate_single_interval() {
        // theta tiny: H_1 is 1 to machine precision
        let params = GemParams::new(0.0, 1e-6).unwrap();
        for construction in [Construction::Stickbreak, Construction::Paintbox, Construction::Poisson] {
            let s = summarize(construction, params, 25, key(23, 0)).unwrap();
            assert_eq!((s.max_value, s.distinct_count, s.tie_count), (1, 1, 25), "{construction}");
        }
    }

    #[test]
    fn poisson_requires_alpha_zero() {
        let params = GemParams::new(0.5, 1.0).unwrap();
        assert!(summarize(Construction::Poisson, params, 5, key(1, 0)).is_err());
        assert!(max_via_poisson(0.0, 5, key(1, 0)).is_err());
    }

    #[test]
    fn summaries_are_replayable() {
        let params = GemParams::new(0.5, 0.5).unwrap();
        for c in [Construction::Stickbreak, Construction::Paintbox] {
            let a = summarize(c, params, 100, key(24, 9)).unwrap();
            let b = summarize(c, params, 100, key(24, 9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn spacing_means() {
        let theta = 2.0;
        let n = 5;
        let reps = 50_000;
        let mut sums = vec![0.0; n as usize];
        for r in 0..reps {
            for (s, d) in sums.iter_mut().zip(poisson_spacings(theta, n, key(25, r)).unwrap()) {
                *s += d;
            }
        }
        for (i, s) in sums.iter().enumerate() {
            let mean = theta / (i + 1) as f64;
            let got = s / reps as f64;
            assert!((got - mean).abs() < 3.5 * mean / (reps as f64).sqrt(), "i={} {got} vs {mean}", i + 1);
        }
    }

    #[test]
    fn count_at_one_exponential_time_has_mean_theta() {
        // n = 1: N(theta gamma_1) is geometric with mean theta
        let theta = 1.7;
        let reps = 100_000;
        let total: u64 = (0..reps).map(|r| max_via_poisson(theta, 1, key(26, r)).unwrap().max_value - 1).sum();
        let mean = total as f64 / reps as f64;
        let sd = (theta * (1.0 + theta) / reps as f64).sqrt();
        assert!((mean - theta).abs() < 3.0 * sd, "{mean}");
    }

    #[test]
    fn max_only_matches_full_summary_in_mean() {
        let params = GemParams::new(0.0, 1.0).unwrap();
        let reps = 50_000;
        let a: u64 = (0..reps).map(|r| sample_max(params, 10, key(27, r)).unwrap()).sum();
        let b: u64 = (0..reps).map(|r| max_via_stickbreak(params, 10, key(28, r)).unwrap().max_value).sum();
        // E M_10 = 1 + H_10, variance ~ 1.5
        let want = 1.0 + (1..=10).map(|i| 1.0 / i as f64).sum::<f64>();
        for got in [a, b] {
            let m = got as f64 / reps as f64;
            assert!((m - want).abs() < 4.0 * (1.6 / reps as f64).sqrt(), "{m} vs {want}");
        }
    }
}
