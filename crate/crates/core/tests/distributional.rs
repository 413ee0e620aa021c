//! Monte-Carlo checks of sampling laws and null distributions.

mod common;

use hdcp::detect::{draw_intervals, permute_indices};
use hdcp::limitdist::{estimate_quantiles, GaussianPairArray, LimitMethod};
use hdcp::metric::{pairwise_matrix, DataMatrix, GroupingScheme};
use hdcp::rng::substream;
use hdcp::scan::scan_max;
use hdcp::two_sample::t_statistic;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_uniform(counts: &[usize]) -> (f64, f64) {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let crit = ChiSquared::new((counts.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.99);
    (stat, crit)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn permutation_positions_are_uniform() {
    assert_eq!(permute_indices(1, 3, 0), vec![0]);
    assert_eq!(permute_indices(9, 3, 4), permute_indices(9, 3, 4));
    let mut counts = [0usize; 5];
    for id in 0..10_000 {
        let perm = permute_indices(5, 77, id);
        counts[perm.iter().position(|&x| x == 0).unwrap()] += 1;
    }
    let (stat, crit) = chi_square_uniform(&counts);
    assert!(stat < crit, "chi2 {stat} >= {crit}, counts {counts:?}");
}

#[test]
fn interval_starts_are_uniform() {
    let ivs = draw_intervals(20, 10_000, 5).unwrap();
    let mut counts = [0usize; 13];
    for iv in &ivs {
        assert!(iv.s >= 1 && iv.s + 7 <= iv.e && iv.e <= 20);
        counts[iv.s - 1] += 1;
    }
    let (stat, crit) = chi_square_uniform(&counts);
    assert!(stat < crit, "chi2 {stat} >= {crit}");
    assert!(draw_intervals(8, 20, 1)
        .unwrap()
        .iter()
        .all(|iv| (iv.s, iv.e) == (1, 8)));
}

#[test]
fn null_t_statistic_is_standardized() {
    let (n, p, draws) = (40, 50, 500);
    let scheme = GroupingScheme::l1_sqrt(p).unwrap();
    let a: Vec<usize> = (0..20).collect();
    let b: Vec<usize> = (20..40).collect();
    let ts: Vec<f64> = (0..draws)
        .map(|j| {
            let mut rng = substream(2024, 900, j);
            let vals = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
            let d = pairwise_matrix(&DataMatrix::new(n, p, vals).unwrap(), &scheme).unwrap();
            t_statistic(&d, &a, &b).unwrap().t
        })
        .collect();
    let (mean, sd) = mean_sd(&ts);
    assert!(
        mean.abs() < 3.0 * sd / (draws as f64).sqrt(),
        "mean {mean}, sd {sd}"
    );
    assert!((0.8..=1.25).contains(&sd), "sd {sd}");
}

#[test]
fn scan_localizes_strong_mean_shift() {
    let (n, p) = (40, 20);
    let scheme = GroupingScheme::l1_sqrt(p).unwrap();
    let hits = (0..100)
        .filter(|&j| {
            let mut rng = substream(99, 901, j);
            let vals = (0..n * p)
                .map(|k| {
                    let z: f64 = rng.sample(StandardNormal);
                    if k / p >= n / 2 {
                        z + 2.0
                    } else {
                        z
                    }
                })
                .collect();
            let d = pairwise_matrix(&DataMatrix::new(n, p, vals).unwrap(), &scheme).unwrap();
            let (b, _) = scan_max(&d, 1, n).unwrap();
            b.abs_diff(n / 2) <= 2
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

const REPS: u64 = 5000;
const GRID: usize = 200;

fn limit_cov(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let overlap = b1.min(b2) - a1.max(a2);
    if overlap > 0.0 {
        overlap * overlap
    } else {
        0.0
    }
}

const PAIRS: [((f64, f64), (f64, f64)); 6] = [
    ((0.0, 0.5), (0.0, 0.5)),
    ((0.0, 0.6), (0.3, 1.0)),
    ((0.0, 1.0), (0.25, 0.75)),
    ((0.1, 0.4), (0.2, 0.9)),
    ((0.0, 0.3), (0.5, 1.0)),
    ((0.2, 0.8), (0.2, 0.8)),
];

/// Checks on one shared set of draws: the covariance of `Q`, and mean and
/// variance of `G0`.
#[test]
fn pair_array_second_moments() {
    let mut prods = vec![Vec::with_capacity(REPS as usize); PAIRS.len()];
    let mut paths = Vec::with_capacity(REPS as usize);
    for j in 0..REPS {
        let w = GaussianPairArray::sample(GRID, &mut substream(31, 902, j)).unwrap();
        for (i, ((a1, b1), (a2, b2))) in PAIRS.iter().enumerate() {
            prods[i].push(w.q(*a1, *b1) * w.q(*a2, *b2));
        }
        paths.push(w.g0_path());
    }
    for (i, ((a1, b1), (a2, b2))) in PAIRS.into_iter().enumerate() {
        let (mean, sd) = mean_sd(&prods[i]);
        let se = sd / (REPS as f64).sqrt();
        let target = limit_cov(a1, b1, a2, b2);
        assert!(
            (mean - target).abs() < 3.0 * se,
            "cov Q({a1},{b1}), Q({a2},{b2}) = {mean}, expected {target} +- {}",
            3.0 * se
        );
    }
    assert!((mean_sd(&prods[0]).0 / 0.25 - 1.0).abs() < 0.05);

    let mid: Vec<f64> = paths.iter().map(|g| g[GRID / 2]).collect();
    let (_, sd) = mean_sd(&mid);
    assert!((sd * sd - 1.0).abs() < 0.05, "var G0(0.5) = {}", sd * sd);
}

/// The 10% relative bound on `cov(Q(0, .6), Q(.3, 1)) = 0.09` is about 1.5
/// standard errors at 5000 draws, and pointwise bounds on the mean of `G0`
/// over a whole correlated grid compound, so both use a larger sample.
#[test]
fn pair_array_large_sample() {
    const DRAWS: u64 = 20_000;
    let mut prods = Vec::with_capacity(DRAWS as usize);
    let mut paths = Vec::with_capacity(DRAWS as usize);
    for j in 0..DRAWS {
        let w = GaussianPairArray::sample(GRID, &mut substream(32, 902, j)).unwrap();
        prods.push(w.q(0.0, 0.6) * w.q(0.3, 1.0));
        paths.push(w.g0_path());
    }
    let cov = mean_sd(&prods).0;
    assert!((cov / 0.09 - 1.0).abs() < 0.10, "cov {cov}");

    let se_mean = |k: usize| {
        let col: Vec<f64> = paths.iter().map(|g| g[k]).collect();
        let (mean, sd) = mean_sd(&col);
        (mean, sd / (DRAWS as f64).sqrt())
    };
    for k in (1..10).map(|i| i * GRID / 10) {
        let (mean, se) = se_mean(k);
        assert!(mean.abs() < 3.0 * se, "G0 mean {mean} at k={k}");
    }
    // Bonferroni bound for the whole grid: two-sided 0.0027 split over the points.
    let points = GRID - 7;
    let z = statrs::distribution::Normal::new(0.0, 1.0)
        .unwrap()
        .inverse_cdf(1.0 - 0.0027 / (2.0 * points as f64));
    for k in 4..=GRID - 4 {
        let (mean, se) = se_mean(k);
        assert!(mean.abs() < z * se, "G0 mean {mean} at k={k}");
    }
}

/// The two samplers at matched scale. The 0.99 quantile is left out: the
/// finite-sample statistic has a heavier upper tail than the Gaussian limit.
#[test]
fn samplers_agree_at_matched_scale() {
    let probs = [0.9, 0.95];
    let pa = estimate_quantiles(LimitMethod::PairArray { grid: 100 }, 2000, &probs, 12).unwrap();
    let db =
        estimate_quantiles(LimitMethod::DataBased { n: 100, p: 200 }, 2000, &probs, 12).unwrap();
    for i in 0..probs.len() {
        assert!(
            (pa.quants[i] - db.quants[i]).abs() < 0.05,
            "{:?} vs {:?}",
            pa.quants,
            db.quants
        );
    }
}

#[test]
fn median_is_middle_order_statistic() {
    let method = LimitMethod::PairArray { grid: 20 };
    let table = estimate_quantiles(method, 101, &[0.5], 3).unwrap();
    let mut draws = hdcp::limitdist::sample_replicates(method, 101, 3).unwrap();
    draws.sort_by(f64::total_cmp);
    assert_eq!(table.quants[0], draws[50]);
}
