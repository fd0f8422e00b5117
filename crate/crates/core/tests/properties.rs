//! Randomised properties over parameters, sizes and seeds.

use proptest::prelude::*;

use gemmax::exact::{
    convolve_geometrics, exact_mean_var, pgf_alternating, pgf_product, taus_for_beta_mixed, taus_for_max, DiscretePmf,
};
use gemmax::gem::{max_via_paintbox, max_via_stickbreak, sample_exchangeable};
use gemmax::limit::{limit_cdf_closedform_half, LimitCdfPoint, CdfMethod};
use gemmax::randkit::ReplicaKey;
use gemmax::special::{log_gamma, rising_factorial};
use gemmax::stats::sup_distance;
use gemmax::tables::{read_cdf, read_pmf, write_cdf, write_pmf};
use gemmax::ties::hazard_moment;
use gemmax::GemParams;

fn gem() -> impl Strategy<Value = GemParams> {
    (0.0..0.45f64, 0.0..1.0f64, 0.05..6.0f64).prop_map(|(a, s, t)| {
        // theta ranges over (-alpha, 6) for alpha > 0
        let theta = if a == 0.0 { t } else { -a + s * (a + t) + 1e-9 };
        GemParams::new(a, theta).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_conserves_mass_and_moments(theta in 0.05..8.0f64, n in 1u64..200) {
        let spec = taus_for_max(theta, n).unwrap();
        let pmf = convolve_geometrics(&spec, 1e-13).unwrap();
        prop_assert!((pmf.total() + pmf.tail_mass - 1.0).abs() <= 1e-12);
        prop_assert!(pmf.tail_mass <= 1e-13);
        let (mean, var) = exact_mean_var(&spec);
        prop_assert!((pmf.mean() - mean).abs() <= 1e-9 * (1.0 + mean));
        prop_assert!((pmf.variance() - var).abs() <= 1e-8 * (1.0 + var));
    }

    #[test]
    fn beta_mixture_with_unit_b_is_the_max_law(theta in 0.01..50.0f64, n in 1u64..100) {
        prop_assert_eq!(taus_for_beta_mixed(theta, 1.0, n).unwrap(), taus_for_max(theta, n).unwrap());
    }

    #[test]
    fn generating_functions_agree(theta in 0.2..6.0f64, n in 0u64..=12, z in 0.05..0.95f64) {
        let params = GemParams::one_parameter(theta).unwrap();
        let a = pgf_alternating(params, n, z, 1_000_000).unwrap();
        let b = pgf_product(theta, n, z).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn summaries_respect_their_invariants(params in gem(), n in 1u64..400, r in 0u64..1_000) {
        let key = ReplicaKey::new(31, r);
        for s in [max_via_stickbreak(params, n, key).unwrap(), max_via_paintbox(params, n, key).unwrap()] {
            prop_assert!(1 <= s.tie_count && s.tie_count <= n);
            prop_assert!(1 <= s.distinct_count && s.distinct_count <= n);
            prop_assert!(s.max_value >= s.distinct_count);
            prop_assert_eq!(s.n, n);
        }
    }

    #[test]
    fn exchangeable_prefixes_are_stable(params in gem(), n in 2u64..300, r in 0u64..1_000) {
        let key = ReplicaKey::new(32, r);
        let long = sample_exchangeable(params, n, key).unwrap();
        let short = sample_exchangeable(params, n / 2, key).unwrap();
        prop_assert_eq!(&long[..short.len()], &short[..]);
        prop_assert!(long.iter().all(|&x| x >= 1));
    }

    #[test]
    fn hazard_moments_are_decreasing_in_k(params in gem(), i in 1u64..10_000, k in 1u64..40) {
        let a = hazard_moment(params, i, k).unwrap();
        let b = hazard_moment(params, i, k + 1).unwrap();
        prop_assert!(a > 0.0 && a < 1.0 && b < a);
    }

    #[test]
    fn log_gamma_recurrence(x in 0.01..150.0f64) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!((rising_factorial(x, 3) - x * (x + 1.0) * (x + 2.0)).abs() <= 1e-12 * rising_factorial(x, 3));
    }

    #[test]
    fn sup_distance_is_invariant_under_increasing_maps(xs in prop::collection::vec(0.0..1.0f64, 100..400)) {
        let d = sup_distance(&xs, |x| x.clamp(0.0, 1.0));
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).exp()).collect();
        let e = sup_distance(&ys, |y| (y.ln() / 3.0).clamp(0.0, 1.0));
        prop_assert!((d - e).abs() < 1e-12);
    }

    #[test]
    fn pmf_tables_round_trip(offset in 0u64..50, raw in prop::collection::vec(0.0..1.0f64, 1..60), tail in 0.0..1e-6f64) {
        let s: f64 = raw.iter().sum::<f64>().max(1e-300);
        let probs = raw.iter().map(|p| p / s * (1.0 - tail)).collect();
        let pmf = DiscretePmf::new(offset, probs, tail).unwrap();
        let mut buf = Vec::new();
        write_pmf(&mut buf, &pmf).unwrap();
        prop_assert_eq!(read_pmf(buf.as_slice()).unwrap(), pmf);
    }

    #[test]
    fn cdf_tables_round_trip(theta in -0.49..5.0f64, xs in prop::collection::vec(1e-6..1e6f64, 1..30)) {
        let pts: Vec<LimitCdfPoint> = xs.iter().map(|&x| limit_cdf_closedform_half(theta, x).unwrap()).collect();
        prop_assert!(pts.iter().all(|p| p.method == CdfMethod::ClosedForm && (0.0..=1.0).contains(&p.value)));
        let mut buf = Vec::new();
        write_cdf(&mut buf, &pts).unwrap();
        prop_assert_eq!(read_cdf(buf.as_slice()).unwrap(), pts);
    }
}
