//! Goodness-of-fit tests: Pearson chi-square against a pmf, pooled two-sample
//! chi-square, Kolmogorov-Smirnov, and total variation distance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exact::DiscretePmf;

const P_FLOOR: f64 = 1e-300;
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Chisq,
    Ks,
    TwoSampleChisq,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::Chisq => "chisq",
            TestKind::Ks => "ks",
            TestKind::TwoSampleChisq => "two_sample_chisq",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chisq" => Ok(TestKind::Chisq),
            "ks" => Ok(TestKind::Ks),
            "two_sample_chisq" => Ok(TestKind::TwoSampleChisq),
            other => Err(Error::Parse(format!("unknown test '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub dof: u64,
    pub bins: u64,
    pub n_samples: u64,
}

/// Counts over non-negative integers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Histogram {
    counts: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut h = Self::new();
        for v in values {
            h.add(v);
        }
        h
    }

    pub fn add(&mut self, value: u64) {
        *self.counts.entry(value).or_insert(0) += 1;
    }

    pub fn add_count(&mut self, value: u64, count: u64) {
        if count > 0 {
            *self.counts.entry(value).or_insert(0) += count;
        }
    }

    pub fn get(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    pub fn frequency(&self, value: u64) -> f64 {
        self.get(value) as f64 / self.total() as f64
    }
}

fn chisq_sf(statistic: f64, dof: u64) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    dist.sf(statistic).max(P_FLOOR)
}

/// Pearson chi-square of observed counts against `pmf`. Adjacent support
/// points are pooled until every expected count is at least 5; observations
/// outside the explicit support join the nearest end bin, and the tail mass
/// joins the last bin.
pub fn chisq_vs_pmf(counts: &Histogram, pmf: &DiscretePmf) -> Result<GofReport> {
    let total = counts.total();
    if total < 1000 {
        return Err(Error::InsufficientData(format!("chi-square needs >= 1000 observations, got {total}")));
    }
    let n = total as f64;
    let below: u64 = counts.iter().filter(|(k, _)| *k < pmf.offset).map(|(_, c)| c).sum();
    let above: u64 = counts.iter().filter(|(k, _)| *k > pmf.last()).map(|(_, c)| c).sum();

    // (observed, expected) per pooled bin
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (below as f64, 0.0);
    for (k, p) in pmf.support() {
        obs += counts.get(k) as f64;
        exp += n * p;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    obs += above as f64;
    exp += n * pmf.tail_mass;
    if exp >= MIN_EXPECTED || bins.is_empty() {
        bins.push((obs, exp));
    } else {
        let last = bins.last_mut().unwrap();
        last.0 += obs;
        last.1 += exp;
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData("chi-square needs at least two pooled bins".into()));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() as u64 - 1;
    Ok(GofReport {
        test: TestKind::Chisq,
        statistic,
        p_value: chisq_sf(statistic, dof),
        dof,
        bins: bins.len() as u64,
        n_samples: total,
    })
}

/// Pooled two-sample chi-square (homogeneity) on the merged integer support.
/// Adjacent values are pooled until both expected counts reach 5.
pub fn two_sample_chisq(a: &Histogram, b: &Histogram) -> Result<GofReport> {
    let (na, nb) = (a.total(), b.total());
    if na < 100 || nb < 100 {
        return Err(Error::InsufficientData(format!("two-sample chi-square needs >= 100 per sample, got {na}, {nb}")));
    }
    let share_a = na as f64 / (na + nb) as f64;
    let share_b = 1.0 - share_a;
    let mut keys: Vec<u64> = a.iter().map(|(k, _)| k).chain(b.iter().map(|(k, _)| k)).collect();
    keys.sort_unstable();
    keys.dedup();

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for k in keys {
        ca += a.get(k) as f64;
        cb += b.get(k) as f64;
        let pooled = ca + cb;
        if pooled * share_a.min(share_b) >= MIN_EXPECTED {
            bins.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => bins.push((ca, cb)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData("two-sample chi-square needs at least two pooled bins".into()));
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(oa, ob)| {
            let pooled = oa + ob;
            let (ea, eb) = (pooled * share_a, pooled * share_b);
            (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb
        })
        .sum();
    let dof = bins.len() as u64 - 1;
    Ok(GofReport {
        test: TestKind::TwoSampleChisq,
        statistic,
        p_value: chisq_sf(statistic, dof),
        dof,
        bins: bins.len() as u64,
        n_samples: na + nb,
    })
}

/// Asymptotic Kolmogorov distribution: `P[sqrt(n) D_n > lambda]`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi theta form, fast for small lambda
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
pub fn ks_vs_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GofReport> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!("KS needs >= 100 samples, got {n}")));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let sq = nf.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(GofReport {
        test: TestKind::Ks,
        statistic: d,
        p_value: kolmogorov_sf(lambda).max(P_FLOOR),
        dof: 1,
        bins: n as u64,
        n_samples: n as u64,
    })
}

/// Largest gap between the empirical cdf of `samples` and `cdf`.
pub fn sup_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        // ties: the empirical cdf jumps once per distinct value
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max(((j + 1) as f64 / nf - f).abs()).max((f - i as f64 / nf).abs());
        i = j + 1;
    }
    d
}

/// `(1/2) sum_k |p_k - q_k|` with `q` the empirical frequencies. Observed
/// mass off the explicit support is compared with the pmf's tail mass.
pub fn tv_distance(p: &DiscretePmf, q_counts: &Histogram) -> f64 {
    let total = q_counts.total() as f64;
    let mut sum = 0.0;
    for (k, pk) in p.support() {
        sum += (pk - q_counts.get(k) as f64 / total).abs();
    }
    let outside: u64 = q_counts.iter().filter(|(k, _)| *k < p.offset || *k > p.last()).map(|(_, c)| c).sum();
    sum += (p.tail_mass - outside as f64 / total).abs();
    (0.5 * sum).min(1.0)
}

/// Total variation distance between two explicit pmfs.
pub fn tv_distance_pmfs(p: &DiscretePmf, q: &DiscretePmf) -> f64 {
    let lo = p.offset.min(q.offset);
    let hi = p.last().max(q.last());
    let sum: f64 = (lo..=hi).map(|k| (p.prob(k) - q.prob(k)).abs()).sum();
    (0.5 * (sum + (p.tail_mass - q.tail_mass).abs())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{convolve_geometrics, taus_for_max};
    use crate::randkit::{uniform01, StreamKey};
    use rand_distr::{Binomial, Distribution};

    fn multinomial(pmf: &DiscretePmf, n: u64, seed: u64) -> Histogram {
        let mut rng = StreamKey::new(seed, 0, 0).stream();
        let mut left = n;
        let mut mass = 1.0;
        let mut h = Histogram::new();
        for (k, p) in pmf.support() {
            if left == 0 {
                break;
            }
            let c = if mass <= p { left } else { Binomial::new(left, (p / mass).min(1.0)).unwrap().sample(&mut rng) };
            h.add_count(k, c);
            left -= c;
            mass -= p;
        }
        h.add_count(pmf.last() + 1, left);
        h
    }

    #[test]
    fn chisq_null_calibration() {
        let pmf = convolve_geometrics(&taus_for_max(1.0, 10).unwrap(), 1e-12).unwrap();
        let ps: Vec<f64> = (0..200).map(|s| chisq_vs_pmf(&multinomial(&pmf, 1_000_000, 100 + s), &pmf).unwrap().p_value).collect();
        let small = ps.iter().filter(|&&p| p < 0.01).count();
        assert!(small <= 8, "{small} of 200 below 0.01");
        let d = sup_distance(&ps, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.08, "p-value ecdf distance {d}");
    }

    #[test]
    fn gross_mismatch_and_pooling() {
        let pmf = convolve_geometrics(&taus_for_max(1.0, 10).unwrap(), 1e-12).unwrap();
        let mut h = Histogram::new();
        h.add_count(0, 5000);
        let r = chisq_vs_pmf(&h, &pmf).unwrap();
        assert!(r.p_value < 1e-10);
        assert!(r.p_value > 0.0);
        let small = Histogram::from_values(0..10);
        assert!(matches!(chisq_vs_pmf(&small, &pmf), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn two_sample_null_calibration() {
        let pmf = convolve_geometrics(&taus_for_max(2.0, 5).unwrap(), 1e-12).unwrap();
        let ps: Vec<f64> = (0..200)
            .map(|s| two_sample_chisq(&multinomial(&pmf, 20_000, 500 + s), &multinomial(&pmf, 30_000, 900 + s)).unwrap().p_value)
            .collect();
        assert!(sup_distance(&ps, |x| x.clamp(0.0, 1.0)) < 0.08);
    }

    #[test]
    fn ks_examples() {
        let mut rng = StreamKey::new(41, 0, 0).stream();
        let u: Vec<f64> = (0..100_000).map(|_| uniform01(&mut rng)).collect();
        let r = ks_vs_cdf(&u, |x| x).unwrap();
        assert!(r.statistic < 0.006, "{r:?}");
        let constant = vec![0.3; 500];
        assert!(ks_vs_cdf(&constant, |x| x).unwrap().statistic >= 0.5);
        // rank invariance under a strictly increasing map
        let v: Vec<f64> = u.iter().map(|x| x.powi(3) + 2.0).collect();
        let r2 = ks_vs_cdf(&v, |y| (y - 2.0).cbrt()).unwrap();
        assert!((r.statistic - r2.statistic).abs() < 1e-12);
        assert!(ks_vs_cdf(&u[..50], |x| x).is_err());
    }

    #[test]
    fn ks_null_calibration() {
        let ps: Vec<f64> = (0..200)
            .map(|s| {
                let mut rng = StreamKey::new(42, s, 0).stream();
                let u: Vec<f64> = (0..2000).map(|_| uniform01(&mut rng)).collect();
                ks_vs_cdf(&u, |x| x).unwrap().p_value
            })
            .collect();
        assert!(sup_distance(&ps, |x| x.clamp(0.0, 1.0)) < 0.08);
    }

    #[test]
    fn kolmogorov_branches_meet() {
        for l in [0.5, 0.9, 0.99, 1.0, 1.01, 1.5] {
            let a = kolmogorov_sf(l);
            let lam2 = l * l;
            let b: f64 = 2.0 * (1..100).map(|k| (if k % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * (k * k) as f64 * lam2).exp()).sum::<f64>();
            assert!((a - b).abs() < 1e-12, "{l}");
        }
    }

    #[test]
    fn tv_examples() {
        let pmf = convolve_geometrics(&taus_for_max(1.0, 10).unwrap(), 1e-12).unwrap();
        assert_eq!(tv_distance_pmfs(&pmf, &pmf), 0.0);
        let far = DiscretePmf::new(1000, vec![1.0], 0.0).unwrap();
        assert!((tv_distance_pmfs(&pmf, &far) - 1.0).abs() < 1e-12);
        assert_eq!(tv_distance_pmfs(&pmf, &far), tv_distance_pmfs(&far, &pmf));
        let h = Histogram::from_values(std::iter::repeat(5000).take(10));
        assert!((tv_distance(&pmf, &h) - 1.0).abs() < 1e-9);
        let sampled = multinomial(&pmf, 10_000_000, 7);
        assert!(tv_distance(&pmf, &sampled) < 0.005);
    }
}
