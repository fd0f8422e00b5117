//! Replica campaigns. Replica `r` draws only from streams keyed by
//! `(master_seed, r, lane)` and results are collected in replica order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::DiscretePmf;
use crate::gem::{summarize, Construction, GemParams, SampleSummary};
use crate::randkit::ReplicaKey;
use crate::stats::Histogram;

/// Runs `f` for replicas `0..reps` on `threads` workers (0 = all cores).
pub fn run_replicas<T, F>(reps: u64, master_seed: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(ReplicaKey) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| par_replicas(reps, master_seed, f))
}

/// [`run_replicas`] on the current rayon pool.
pub fn par_replicas<T, F>(reps: u64, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(ReplicaKey) -> Result<T> + Sync + Send,
{
    (0..reps).into_par_iter().map(|r| f(ReplicaKey::new(master_seed, r))).collect()
}

/// One [`SampleSummary`] per replica.
pub fn sample_campaign(
    construction: Construction,
    params: GemParams,
    n: u64,
    reps: u64,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<SampleSummary>> {
    if construction == Construction::Poisson && params.alpha() != 0.0 {
        return Err(Error::Domain(format!(
            "the poisson construction requires alpha = 0, got alpha={}",
            params.alpha()
        )));
    }
    run_replicas(reps, master_seed, threads, |key| summarize(construction, params, n, key))
}

/// Histogram of `M_n` over a campaign.
pub fn max_histogram(summaries: &[SampleSummary]) -> Histogram {
    Histogram::from_values(summaries.iter().map(|s| s.max_value))
}

/// Empirical frequencies as a pmf (no tail mass).
pub fn empirical_pmf(hist: &Histogram) -> Result<DiscretePmf> {
    let total = hist.total();
    if total == 0 {
        return Err(Error::InsufficientData("empty histogram".into()));
    }
    let lo = hist.iter().next().unwrap().0;
    let hi = hist.iter().last().unwrap().0;
    let probs = (lo..=hi).map(|k| hist.get(k) as f64 / total as f64).collect();
    DiscretePmf::new(lo, probs, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_results() {
        let params = GemParams::new(0.3, 1.0).unwrap();
        let one = sample_campaign(Construction::Stickbreak, params, 50, 300, 5, 1).unwrap();
        let four = sample_campaign(Construction::Stickbreak, params, 50, 300, 5, 4).unwrap();
        assert_eq!(one, four);
        assert!(one.iter().enumerate().all(|(i, s)| s.key.replica_index == i as u64));
    }

    #[test]
    fn poisson_campaign_rejects_positive_alpha() {
        let params = GemParams::new(0.5, 1.0).unwrap();
        assert!(sample_campaign(Construction::Poisson, params, 5, 10, 1, 1).is_err());
    }

    #[test]
    fn empirical_pmf_round_trip() {
        let h = Histogram::from_values([2, 2, 3, 5]);
        let p = empirical_pmf(&h).unwrap();
        assert_eq!(p.offset, 2);
        assert_eq!(p.probs, vec![0.5, 0.25, 0.0, 0.25]);
    }
}
