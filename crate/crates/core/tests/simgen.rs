use hdcp::rng::substream;
use hdcp::simgen::{fvbm_gibbs, fvbm_scenario, generate, Fvbm, Scenario};

fn column(ds: &hdcp::LabeledDataset, rows: std::ops::Range<usize>, j: usize) -> Vec<f64> {
    rows.map(|t| ds.data.row(t)[j]).collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

#[test]
fn ar_rows_have_lag_one_correlation() {
    let ds = generate(Scenario::NullGaussAr, 10_000, 6, 3).unwrap();
    for j in 0..5 {
        let x = column(&ds, 0..10_000, j);
        let y = column(&ds, 0..10_000, j + 1);
        let (mx, vx) = mean_var(&x);
        let (my, vy) = mean_var(&y);
        let cov = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - mx) * (b - my))
            .sum::<f64>()
            / 9999.0;
        let r = cov / (vx * vy).sqrt();
        assert!((r - 0.7).abs() < 0.02, "lag-1 correlation {r} at {j}");
        assert!((vx - 1.0).abs() < 0.05);
    }
}

#[test]
fn fvbm_matches_exact_law_for_two_units() {
    let field = [0.1, 0.1];
    let coupling = [0.0, 0.1, 0.1, 0.0];
    let model = Fvbm::new(field.to_vec(), coupling.to_vec()).unwrap();
    let states = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
    let weights: Vec<f64> = states.iter().map(|s| model.log_weight(s).exp()).collect();
    let z: f64 = weights.iter().sum();
    let draws = fvbm_gibbs(&field, &coupling, 10_000, 1000, 10, 4).unwrap();
    let mut counts = [0usize; 4];
    for d in &draws {
        let k = states
            .iter()
            .position(|s| s[0] == d[0] && s[1] == d[1])
            .unwrap();
        counts[k] += 1;
    }
    let tv: f64 = 0.5
        * counts
            .iter()
            .zip(&weights)
            .map(|(&c, w)| (c as f64 / draws.len() as f64 - w / z).abs())
            .sum::<f64>();
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn fvbm_scenario_regimes_differ_in_mean() {
    let ds = fvbm_scenario(1000, 6, 5).unwrap();
    assert_eq!(ds.true_cps, vec![500]);
    assert!(ds.data.values().iter().all(|&v| v == 1.0 || v == -1.0));
    for j in 0..6 {
        let (m1, _) = mean_var(&column(&ds, 0..500, j));
        let (m2, _) = mean_var(&column(&ds, 500..1000, j));
        assert!(m2 - m1 > 0.3, "coordinate {j}: {m1} vs {m2}");
    }
    let small = fvbm_scenario(50, 25, 1).unwrap();
    assert_eq!(small.true_cps, vec![25]);
    assert_eq!((small.data.n(), small.data.p()), (50, 25));
    // independent-unit sampler is fair
    let mut rng = substream(8, 0, 0);
    let free = Fvbm::banded(3, 0.0, 0.0)
        .unwrap()
        .sample(4000, 10, 1, &mut rng)
        .unwrap();
    for j in 0..3 {
        let m = free.iter().map(|x| x[j]).sum::<f64>() / 4000.0;
        assert!(m.abs() < 3.0 / 4000f64.sqrt());
    }
}

#[test]
fn exponential_change_preserves_two_moments() {
    let n = 20_000;
    let ds = generate(Scenario::HigherMomentExp, n, 3, 6).unwrap();
    let half = n / 2;
    for j in 0..3 {
        let (m1, v1) = mean_var(&column(&ds, 0..half, j));
        let (m2, v2) = mean_var(&column(&ds, half..n, j));
        let se_mean = (1.0 / half as f64).sqrt();
        assert!((m1 - 1.0).abs() < 3.0 * se_mean && (m2 - 1.0).abs() < 3.0 * se_mean);
        // var of a sample variance: (mu4 - sigma^4) / n, mu4 = 3 (normal) or 9 (exponential)
        assert!((v1 - 1.0).abs() < 3.0 * (2.0 / half as f64).sqrt());
        assert!((v2 - 1.0).abs() < 3.0 * (8.0 / half as f64).sqrt());
    }
}

#[test]
fn poisson_rademacher_blocks() {
    let ds = generate(Scenario::HigherMomentPoissonRademacher, 400, 10, 2).unwrap();
    assert_eq!(ds.params.beta, Some(0.5));
    for t in 200..400 {
        let row = ds.data.row(t);
        assert!(row[5..].iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(row[..5].iter().all(|&v| v >= -1.0 && v.fract() == 0.0));
    }
}

#[test]
fn directed_chain_recursion() {
    let ds = generate(Scenario::DirectedChain, 100, 5, 3).unwrap();
    assert_eq!(ds.true_cps, vec![50]);
    assert_eq!(ds.params.phi, Some(0.5));
    // after the change the innovations x_i - 0.5 x_{i-1} are exponential, hence positive
    for t in 50..100 {
        let row = ds.data.row(t);
        assert!(row[0] > 0.0);
        for i in 1..5 {
            assert!(row[i] - 0.5 * row[i - 1] > 0.0);
        }
    }
}

#[test]
fn volatility_series_are_small_and_centered() {
    // unconditional variance a0 / (1 - sum of the other coefficients)
    for (sc, uncond) in [
        (Scenario::NullArch2, 1e-6 / 0.991f64),
        (Scenario::NullGarch11, 1e-6 / 0.998),
    ] {
        let ds = generate(sc, 5000, 2, 1).unwrap();
        let (m, v) = mean_var(&column(&ds, 0..5000, 0));
        assert!(m.abs() < 4.0 * (uncond / 5000.0).sqrt());
        assert!((v / uncond - 1.0).abs() < 0.1, "{sc}: {v} vs {uncond}");
    }
}
