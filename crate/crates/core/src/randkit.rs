//! Replayable randomness.
//!
//! Every random quantity in a campaign is drawn from a stream addressed by
//! `(master_seed, replica_index, lane)`. The triple is hashed into the full
//! PCG state, so streams can be created in any order on any thread and a
//! campaign's output is a pure function of its master seed.

use rand::distributions::{Distribution, Open01};
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;

use crate::error::{domain, Result};

/// Address of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replica_index: u64,
    pub lane: u64,
}

/// The per-replica part of a [`StreamKey`]; lanes are attached by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReplicaKey {
    pub master_seed: u64,
    pub replica_index: u64,
}

impl ReplicaKey {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        Self { master_seed, replica_index }
    }

    pub fn lane(self, lane: Lane) -> StreamKey {
        StreamKey { master_seed: self.master_seed, replica_index: self.replica_index, lane: lane as u64 }
    }

    pub fn stream(self, lane: Lane) -> Stream {
        self.lane(lane).stream()
    }
}

/// Role of a stream within one replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Sticks = 0,
    Sample = 1,
    Discovery = 2,
    Tail = 3,
    Auxiliary = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(master_seed: u64, replica_index: u64, lane: u64) -> Self {
        Self { master_seed, replica_index, lane }
    }

    pub fn stream(&self) -> Stream {
        let mut h = self.master_seed;
        let _ = splitmix64(&mut h);
        h ^= splitmix64(&mut self.replica_index.wrapping_add(0x5851_F42D_4C95_7F2D));
        let _ = splitmix64(&mut h);
        h ^= splitmix64(&mut self.lane.wrapping_add(0x1405_7B7E_F767_814F));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut h).to_le_bytes());
        }
        Stream(Pcg64::from_seed(seed))
    }
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct Stream(Pcg64);

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// Uniform variate strictly inside (0, 1).
#[inline]
pub fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Exponential(1) by inversion.
#[inline]
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -uniform01(rng).ln()
}

#[inline]
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `ln G` for `G ~ Gamma(shape, 1)`.
///
/// Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 the boost
/// `G = G' U^{1/shape}` with `G' ~ Gamma(shape + 1)`, applied in log space so
/// that very small shapes do not underflow.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let boost = uniform01(rng).ln() / shape;
        return marsaglia_tsang(shape + 1.0, rng).ln() + boost;
    }
    marsaglia_tsang(shape, rng).ln()
}

fn marsaglia_tsang<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = std_normal(rng);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = uniform01(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return domain(format!("gamma shape must be finite and > 0, got {shape}"));
    }
    Ok(ln_gamma_variate(shape, rng).exp())
}

/// Draws `(B, 1 - B)` for `B ~ Beta(a, b)` as a ratio of gammas. Both parts
/// are formed directly so neither loses precision near 0 or 1.
pub fn beta_pair<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> (f64, f64) {
    let la = ln_gamma_variate(a, rng);
    let lb = ln_gamma_variate(b, rng);
    let d = lb - la;
    // B = 1 / (1 + e^d), 1 - B = 1 / (1 + e^{-d})
    let x = logistic(-d).max(f64::MIN_POSITIVE);
    let y = logistic(d).max(f64::MIN_POSITIVE);
    (x, y)
}

#[inline]
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("beta shapes must be finite and > 0, got ({a}, {b})"));
    }
    Ok(beta_pair(a, b, rng).0)
}

/// Geometric on {0, 1, ...} with `P[k] = tau (1 - tau)^k`, by inversion.
pub fn sample_geometric<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> Result<u64> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("geometric success parameter must lie in (0, 1), got {tau}"));
    }
    Ok(geometric_unchecked(tau, rng))
}

#[inline]
pub(crate) fn geometric_unchecked<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> u64 {
    (uniform01(rng).ln() / (-tau).ln_1p()).floor() as u64
}

/// Arrival times in `(0, horizon]` of a unit-rate Poisson process, built
/// from exponential spacings.
pub fn sample_poisson_arrivals<R: Rng + ?Sized>(horizon: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("poisson horizon must be finite and > 0, got {horizon}"));
    }
    let mut out = Vec::new();
    let mut t = exp1(rng);
    while t <= horizon {
        out.push(t);
        t += exp1(rng);
    }
    Ok(out)
}

/// Number of unit-rate arrivals in `(0, horizon]`, by walking the spacings.
pub fn count_poisson_arrivals<R: Rng + ?Sized>(horizon: f64, rng: &mut R) -> u64 {
    let mut n = 0;
    let mut t = exp1(rng);
    while t <= horizon {
        n += 1;
        t += exp1(rng);
    }
    n
}

/// Poisson(`lambda`) count, returned as `f64` so astronomically large means
/// can be represented. Above 1e15 a normal approximation is used; its
/// relative error there is below 1e-7.
pub fn poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda < 30.0 {
        return count_poisson_arrivals(lambda, rng) as f64;
    }
    if lambda > 1e15 {
        return (lambda + lambda.sqrt() * std_normal(rng)).round().max(0.0);
    }
    rand_distr::Poisson::new(lambda).map(|d| d.sample(rng)).unwrap_or(lambda)
}

/// `n` order statistics of Uniform(0,1), ascending, via normalised
/// exponential spacings.
pub fn sorted_uniforms<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += exp1(rng);
        out.push(acc);
    }
    let total = acc + exp1(rng);
    for v in &mut out {
        *v /= total;
    }
    out
}
