mod common;

use hdcp::detect::{single_test_on_matrix, wbs_on_matrix, DetectConfig};
use hdcp::metric::{pairwise_matrix, DataMatrix, GroupingScheme};
use hdcp::simgen::{generate, Scenario};
use hdcp::two_sample::t_statistic;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(scenario: Scenario, n: usize, p: usize, seed: u64) -> hdcp::DistanceMatrix {
    let ds = generate(scenario, n, p, seed).unwrap();
    pairwise_matrix(&ds.data, &GroupingScheme::l1_sqrt(p).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wbs_segments_are_long_enough(seed in 0u64..10_000, n in 8usize..60) {
        let d = matrix(Scenario::TwoCpHigherExp, n, 5, seed);
        let config = DetectConfig::new(0.2, 19, 20, seed).unwrap();
        let set = wbs_on_matrix(&d, &config).unwrap();
        let mut bounds = vec![0];
        bounds.extend(&set.locations);
        bounds.push(n);
        for w in bounds.windows(2) {
            prop_assert!(w[1] >= w[0] + 4, "segments {:?}", bounds);
        }
        for c in &set.details {
            prop_assert_eq!(c.new_regime_start, c.tau + 1);
            prop_assert!(c.statistic > c.threshold);
            prop_assert!(c.segment.0 <= c.interval.0 && c.interval.1 <= c.segment.1);
        }
    }

    #[test]
    fn single_test_decision_is_consistent(seed in 0u64..10_000, b in 1usize..40) {
        let d = matrix(Scenario::MeanShiftIid, 20, 4, seed);
        let config = DetectConfig::new(0.1, b, 1, seed).unwrap();
        let r = single_test_on_matrix(&d, &config).unwrap();
        prop_assert_eq!(r.rejected, r.m_n > r.threshold);
        let p = r.p_value.unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!((p * (b + 1) as f64).fract().abs() < 1e-9);
        prop_assert!(r.tau_hat >= 4 && r.tau_hat <= 16);
    }

    #[test]
    fn t_ignores_order_within_samples(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = common::random_rows(&mut rng, 12, 3);
        let d = pairwise_matrix(&DataMatrix::from_rows(&rows).unwrap(), &GroupingScheme::l1_sqrt(3).unwrap()).unwrap();
        let mut a: Vec<usize> = (0..5).collect();
        let mut b: Vec<usize> = (5..12).collect();
        let t0 = t_statistic(&d, &a, &b).unwrap().t;
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let t1 = t_statistic(&d, &a, &b).unwrap().t;
        prop_assert!(common::rel_close(t0, t1, 1e-10));
        let t2 = t_statistic(&d, &b, &a).unwrap().t;
        prop_assert!(common::rel_close(t0, t2, 1e-10));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let d = matrix(Scenario::TwoCpMeanIid, 90, 30, 4);
    let config = DetectConfig::new(0.05, 99, 30, 17).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                wbs_on_matrix(&d, &config).unwrap(),
                single_test_on_matrix(&d, &config).unwrap(),
            )
        })
    };
    let base = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(run(threads), base);
    }
    assert_eq!(base.0.locations, vec![30, 60]);
}

#[test]
fn permutation_cost_does_not_grow_with_dimension() {
    // same n, very different p: the replicate loop only reads the distance matrix
    let config = DetectConfig::new(0.05, 199, 1, 3).unwrap();
    let time = |p: usize| {
        let d = matrix(Scenario::NullGaussIid, 60, p, 1);
        let start = std::time::Instant::now();
        single_test_on_matrix(&d, &config).unwrap();
        start.elapsed().as_secs_f64()
    };
    let small = time(10).max(1e-4);
    let large = time(1000);
    assert!(large / small < 10.0, "p=10: {small}s, p=1000: {large}s");
}
