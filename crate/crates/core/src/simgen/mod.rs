//! Seeded generators for the simulation scenarios, each returning data with
//! its true change-points (`tau` = last index of the old regime).

mod fvbm;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

pub use fvbm::{fvbm_gibbs, Fvbm, DEFAULT_BURNIN, DEFAULT_THIN};

use crate::error::{Error, Result};
use crate::metric::DataMatrix;
use crate::rng::{self, substream};

pub const AR_COEF: f64 = 0.7;
pub const MEAN_SHIFT: f64 = 0.6;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_PHI: f64 = 0.5;
pub const BANDED_CORR: f64 = 0.25;
const ARCH_PARAMS: (f64, f64, f64) = (1e-6, 0.008, 0.001);
const GARCH_PARAMS: (f64, f64, f64) = (1e-6, 0.001, 0.001);
const VOLATILITY_WARMUP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NullGaussIid,
    NullGaussAr,
    NullArch2,
    NullGarch11,
    MeanShiftIid,
    MeanShiftAr,
    HigherMomentExp,
    HigherMomentPoissonRademacher,
    HigherMomentBanded,
    TwoCpMeanIid,
    TwoCpMeanAr,
    TwoCpHigherExp,
    TwoCpHigherPoisson,
    DirectedChain,
    Fvbm,
}

impl Scenario {
    pub const ALL: [Scenario; 15] = [
        Scenario::NullGaussIid,
        Scenario::NullGaussAr,
        Scenario::NullArch2,
        Scenario::NullGarch11,
        Scenario::MeanShiftIid,
        Scenario::MeanShiftAr,
        Scenario::HigherMomentExp,
        Scenario::HigherMomentPoissonRademacher,
        Scenario::HigherMomentBanded,
        Scenario::TwoCpMeanIid,
        Scenario::TwoCpMeanAr,
        Scenario::TwoCpHigherExp,
        Scenario::TwoCpHigherPoisson,
        Scenario::DirectedChain,
        Scenario::Fvbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NullGaussIid => "null_gauss_iid",
            Scenario::NullGaussAr => "null_gauss_ar",
            Scenario::NullArch2 => "null_arch2",
            Scenario::NullGarch11 => "null_garch11",
            Scenario::MeanShiftIid => "mean_shift_iid",
            Scenario::MeanShiftAr => "mean_shift_ar",
            Scenario::HigherMomentExp => "higher_moment_exp",
            Scenario::HigherMomentPoissonRademacher => "higher_moment_poisson_rademacher",
            Scenario::HigherMomentBanded => "higher_moment_banded",
            Scenario::TwoCpMeanIid => "two_cp_mean_iid",
            Scenario::TwoCpMeanAr => "two_cp_mean_ar",
            Scenario::TwoCpHigherExp => "two_cp_higher_exp",
            Scenario::TwoCpHigherPoisson => "two_cp_higher_poisson",
            Scenario::DirectedChain => "directed_chain",
            Scenario::Fvbm => "fvbm",
        }
    }

    /// True change-points for a series of length `n`.
    pub fn change_points(self, n: usize) -> Vec<usize> {
        use Scenario::*;
        match self {
            NullGaussIid | NullGaussAr | NullArch2 | NullGarch11 => vec![],
            MeanShiftIid
            | MeanShiftAr
            | HigherMomentExp
            | HigherMomentPoissonRademacher
            | HigherMomentBanded
            | DirectedChain
            | Fvbm => vec![n / 2],
            TwoCpMeanIid | TwoCpMeanAr | TwoCpHigherExp | TwoCpHigherPoisson => {
                vec![n / 3, 2 * (n / 3)]
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!(
                    "unknown scenario \"{s}\"; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    /// Rademacher fraction for the Poisson scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Chain coefficient for the directed chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub true_cps: Vec<usize>,
    pub scenario: Scenario,
    pub params: ScenarioParams,
}

/// Per-row sampler for one regime.
#[derive(Debug, Clone, Copy)]
enum Regime {
    Gauss { mean: f64 },
    GaussAr { mean: f64 },
    Exp,
    PoissonCentered,
    PoissonRademacher { beta: f64 },
    BandedGauss,
    BandedExp,
    ChainGauss { phi: f64 },
    ChainExp { phi: f64 },
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn poisson1(rng: &mut ChaCha8Rng) -> f64 {
    Poisson::new(1.0).expect("valid rate").sample(rng)
}

impl Regime {
    fn fill(self, row: &mut [f64], rng: &mut ChaCha8Rng, banded_root: Option<&DMatrix<f64>>) {
        match self {
            Regime::Gauss { mean } => row.iter_mut().for_each(|x| *x = mean + normal(rng)),
            Regime::GaussAr { mean } => {
                let innov = (1.0 - AR_COEF * AR_COEF).sqrt();
                let mut prev = normal(rng);
                row[0] = prev;
                for x in row.iter_mut().skip(1) {
                    prev = AR_COEF * prev + innov * normal(rng);
                    *x = prev;
                }
                row.iter_mut().for_each(|x| *x += mean);
            }
            Regime::Exp => row.iter_mut().for_each(|x| *x = rng.sample(Exp1)),
            Regime::PoissonCentered => row.iter_mut().for_each(|x| *x = poisson1(rng) - 1.0),
            Regime::PoissonRademacher { beta } => {
                let k = (beta * row.len() as f64).floor() as usize;
                for (j, x) in row.iter_mut().enumerate() {
                    *x = if j < k {
                        poisson1(rng) - 1.0
                    } else if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    };
                }
            }
            Regime::BandedGauss | Regime::BandedExp => {
                let root = banded_root.expect("banded root computed");
                let z: Vec<f64> = (0..row.len())
                    .map(|_| match self {
                        Regime::BandedGauss => normal(rng),
                        _ => rng.sample::<f64, _>(Exp1) - 1.0,
                    })
                    .collect();
                for (i, x) in row.iter_mut().enumerate() {
                    *x = (0..z.len()).map(|j| root[(i, j)] * z[j]).sum();
                }
            }
            Regime::ChainGauss { phi } | Regime::ChainExp { phi } => {
                let mut prev = 0.0;
                for x in row.iter_mut() {
                    let eps = match self {
                        Regime::ChainGauss { .. } => 1.0 + normal(rng),
                        _ => rng.sample(Exp1),
                    };
                    prev = phi * prev + eps;
                    *x = prev;
                }
            }
        }
    }
}

/// Symmetric square root of the banded correlation matrix with `0.25` on the
/// first two off-diagonals.
pub fn banded_root(p: usize) -> Result<DMatrix<f64>> {
    let r = DMatrix::from_fn(p, p, |i, j| match i.abs_diff(j) {
        0 => 1.0,
        1 | 2 => BANDED_CORR,
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(r);
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Config(
            "banded correlation matrix is not positive definite".into(),
        ));
    }
    let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(&eig.eigenvectors * sqrt_vals * eig.eigenvectors.transpose())
}

/// Per-coordinate ARCH(2) (`garch = false`) or GARCH(1,1) series, started at
/// the unconditional variance with a discarded warm-up.
fn volatility_columns(n: usize, p: usize, garch: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut values = vec![0.0; n * p];
    for j in 0..p {
        if garch {
            let (a0, a1, b1) = GARCH_PARAMS;
            let uncond = a0 / (1.0 - a1 - b1);
            let (mut x_prev_sq, mut s2_prev) = (uncond, uncond);
            for t in 0..VOLATILITY_WARMUP + n {
                let s2 = a0 + a1 * x_prev_sq + b1 * s2_prev;
                let x = s2.sqrt() * normal(rng);
                if t >= VOLATILITY_WARMUP {
                    values[(t - VOLATILITY_WARMUP) * p + j] = x;
                }
                x_prev_sq = x * x;
                s2_prev = s2;
            }
        } else {
            let (a0, a1, a2) = ARCH_PARAMS;
            let uncond = a0 / (1.0 - a1 - a2);
            let (mut lag1, mut lag2) = (uncond, uncond);
            for t in 0..VOLATILITY_WARMUP + n {
                let s2 = a0 + a1 * lag1 + a2 * lag2;
                let x = s2.sqrt() * normal(rng);
                if t >= VOLATILITY_WARMUP {
                    values[(t - VOLATILITY_WARMUP) * p + j] = x;
                }
                lag2 = lag1;
                lag1 = x * x;
            }
        }
    }
    values
}

fn minimum_n(scenario: Scenario) -> usize {
    match scenario.change_points(100).len() {
        0 => 1,
        1 => 2,
        _ => 3,
    }
}

/// Generates one dataset of `n` observations in `p` dimensions.
pub fn generate(scenario: Scenario, n: usize, p: usize, seed: u64) -> Result<LabeledDataset> {
    if n < minimum_n(scenario) || p == 0 {
        return Err(Error::Config(format!(
            "{scenario} needs n >= {} and p >= 1, got n={n}, p={p}",
            minimum_n(scenario)
        )));
    }
    let mut params = ScenarioParams {
        n,
        p,
        seed,
        beta: None,
        phi: None,
    };
    if scenario == Scenario::Fvbm {
        return fvbm_scenario(n, p, seed);
    }
    let mut rng = substream(seed, rng::DOMAIN_SIMULATION, 0);
    let true_cps = scenario.change_points(n);

    let values = match scenario {
        Scenario::NullArch2 => volatility_columns(n, p, false, &mut rng),
        Scenario::NullGarch11 => volatility_columns(n, p, true, &mut rng),
        _ => {
            use Regime::*;
            let (first, second) = match scenario {
                Scenario::NullGaussIid => (Gauss { mean: 0.0 }, Gauss { mean: 0.0 }),
                Scenario::NullGaussAr => (GaussAr { mean: 0.0 }, GaussAr { mean: 0.0 }),
                Scenario::MeanShiftIid | Scenario::TwoCpMeanIid => {
                    (Gauss { mean: 0.0 }, Gauss { mean: MEAN_SHIFT })
                }
                Scenario::MeanShiftAr | Scenario::TwoCpMeanAr => {
                    (GaussAr { mean: 0.0 }, GaussAr { mean: MEAN_SHIFT })
                }
                Scenario::HigherMomentExp | Scenario::TwoCpHigherExp => (Gauss { mean: 1.0 }, Exp),
                Scenario::HigherMomentPoissonRademacher | Scenario::TwoCpHigherPoisson => {
                    params.beta = Some(DEFAULT_BETA);
                    (PoissonCentered, PoissonRademacher { beta: DEFAULT_BETA })
                }
                Scenario::HigherMomentBanded => (BandedGauss, BandedExp),
                Scenario::DirectedChain => {
                    params.phi = Some(DEFAULT_PHI);
                    (
                        ChainGauss { phi: DEFAULT_PHI },
                        ChainExp { phi: DEFAULT_PHI },
                    )
                }
                Scenario::NullArch2 | Scenario::NullGarch11 | Scenario::Fvbm => unreachable!(),
            };
            let root = match scenario {
                Scenario::HigherMomentBanded => Some(banded_root(p)?),
                _ => None,
            };
            let mut values = vec![0.0; n * p];
            for (t, row) in values.chunks_exact_mut(p).enumerate() {
                // regimes alternate at each true change-point
                let regime_index = true_cps.iter().filter(|&&c| t + 1 > c).count();
                let regime = if regime_index % 2 == 0 { first } else { second };
                regime.fill(row, &mut rng, root.as_ref());
            }
            values
        }
    };
    Ok(LabeledDataset {
        data: DataMatrix::new(n, p, values)?,
        true_cps,
        scenario,
        params,
    })
}

/// Boltzmann-machine scenario: field 0.1 with neighbour coupling 0.1 up to
/// `floor(n/2)`, then field 0.5 with coupling 0.3.
pub fn fvbm_scenario(n: usize, p: usize, seed: u64) -> Result<LabeledDataset> {
    if p < 2 || n < 2 {
        return Err(Error::Config(format!(
            "fvbm needs n >= 2 and p >= 2, got n={n}, p={p}"
        )));
    }
    let mut rng = substream(seed, rng::DOMAIN_SIMULATION, 0);
    let tau = n / 2;
    let first = Fvbm::banded(p, 0.1, 0.1)?.sample(tau, DEFAULT_BURNIN, DEFAULT_THIN, &mut rng)?;
    let second =
        Fvbm::banded(p, 0.5, 0.3)?.sample(n - tau, DEFAULT_BURNIN, DEFAULT_THIN, &mut rng)?;
    let rows: Vec<Vec<f64>> = first.into_iter().chain(second).collect();
    Ok(LabeledDataset {
        data: DataMatrix::from_rows(&rows)?,
        true_cps: vec![tau],
        scenario: Scenario::Fvbm,
        params: ScenarioParams {
            n,
            p,
            seed,
            beta: None,
            phi: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn change_point_locations() {
        assert!(generate(Scenario::NullGaussIid, 20, 3, 1)
            .unwrap()
            .true_cps
            .is_empty());
        assert_eq!(
            generate(Scenario::MeanShiftIid, 100, 3, 1)
                .unwrap()
                .true_cps,
            vec![50]
        );
        assert_eq!(
            generate(Scenario::TwoCpHigherExp, 100, 3, 1)
                .unwrap()
                .true_cps,
            vec![33, 66]
        );
        assert_eq!(fvbm_scenario(50, 25, 1).unwrap().true_cps, vec![25]);
    }

    #[test]
    fn every_scenario_generates() {
        for sc in Scenario::ALL {
            let ds = generate(sc, 30, 6, 2).unwrap();
            assert_eq!(ds.data.n(), 30);
            assert_eq!(ds.data.p(), 6);
            assert!(ds.true_cps.iter().all(|c| (1..30).contains(c)));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        for sc in Scenario::ALL {
            let a = generate(sc, 20, 4, 9).unwrap();
            let b = generate(sc, 20, 4, 9).unwrap();
            assert_eq!(a.data, b.data);
            let c = generate(sc, 20, 4, 10).unwrap();
            assert_ne!(a.data, c.data, "{sc}");
        }
    }

    #[test]
    fn mean_shift_applies_after_tau() {
        let ds = generate(Scenario::MeanShiftIid, 2000, 20, 3).unwrap();
        let mean = |range: std::ops::Range<usize>| {
            let len = range.len() as f64 * 20.0;
            range
                .map(|t| ds.data.row(t).iter().sum::<f64>())
                .sum::<f64>()
                / len
        };
        assert!(mean(0..1000).abs() < 0.03);
        assert!((mean(1000..2000) - MEAN_SHIFT).abs() < 0.03);
    }

    #[test]
    fn poisson_rademacher_layout() {
        let ds = generate(Scenario::HigherMomentPoissonRademacher, 10, 6, 4).unwrap();
        for t in 5..10 {
            assert!(ds.data.row(t)[3..].iter().all(|&v| v == 1.0 || v == -1.0));
            assert!(ds.data.row(t)[..3]
                .iter()
                .all(|&v| v >= -1.0 && v.fract() == 0.0));
        }
    }

    #[test]
    fn banded_root_squares_back() {
        let root = banded_root(12).unwrap();
        let r = &root * &root;
        for i in 0..12usize {
            for j in 0..12 {
                let want = match i.abs_diff(j) {
                    0 => 1.0,
                    1 | 2 => 0.25,
                    _ => 0.0,
                };
                assert!((r[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(generate(Scenario::TwoCpMeanIid, 2, 3, 0).is_err());
        assert!(generate(Scenario::NullGaussIid, 5, 0, 0).is_err());
        assert!(fvbm_scenario(10, 1, 0).is_err());
    }
}
