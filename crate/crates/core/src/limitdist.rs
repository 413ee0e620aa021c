//! Monte-Carlo samplers for the null law of the scan statistic.
//!
//! Two independent constructions are provided:
//!
//! * `PairArray`: a Gaussian array `W_ij`, `1 <= j < i <= N`, defines
//!   `Q(a, b) = (sqrt(2)/N) * sum_{floor(Na) < j < i <= floor(Nb)} W_ij`,
//!   whose covariance is `(min(b1,b2) - max(a1,a2))^2` in the limit. From it
//!   `G0(r) = Q(0,1) - Q(0,r)/r - Q(r,1)/(1-r)` and the statistic is
//!   `max_{4 <= k <= N-4} r(1-r) G0(r)` with `r = k/N`.
//! * `DataBased`: the scan maximum of i.i.d. `N(0, I_p)` data under the
//!   `l1_sqrt` distance.

use std::f64::consts::SQRT_2;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detect::order_statistic;
use crate::error::{Error, Result};
use crate::metric::{pairwise_matrix, DataMatrix, GroupingScheme};
use crate::par::map_init;
use crate::rng::{self, substream};
use crate::scan::scan_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum LimitMethod {
    PairArray { grid: usize },
    DataBased { n: usize, p: usize },
}

/// One draw of the lower-triangular Gaussian array.
#[derive(Debug, Clone)]
pub struct GaussianPairArray {
    grid: usize,
    /// Row `i` (0-based) holds `W_{i,0..i}`, packed.
    w: Vec<f64>,
}

impl GaussianPairArray {
    pub fn sample<R: Rng + ?Sized>(grid: usize, rng: &mut R) -> Result<Self> {
        if grid < 8 {
            return Err(Error::TooSmall {
                what: "limit-law grid",
                min: 8,
                got: grid,
            });
        }
        let w = (0..grid * (grid - 1) / 2)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(GaussianPairArray { grid, w })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i.saturating_sub(1)) / 2;
        &self.w[start..start + i]
    }

    /// `Q(a, b)` evaluated at grid points `lo = floor(Na)`, `hi = floor(Nb)`:
    /// the scaled sum over pairs with `lo < j < i <= hi` (1-based).
    pub fn q_grid(&self, lo: usize, hi: usize) -> f64 {
        let mut sum = 0.0;
        for i in lo..hi.min(self.grid) {
            sum += self.row(i)[lo.min(i)..].iter().sum::<f64>();
        }
        SQRT_2 / self.grid as f64 * sum
    }

    /// `Q(a, b)` for real `0 <= a <= b <= 1`.
    pub fn q(&self, a: f64, b: f64) -> f64 {
        let n = self.grid as f64;
        self.q_grid((n * a).floor() as usize, (n * b).floor() as usize)
    }

    /// `(Q(0, k/N), Q(k/N, 1))` for `k = 0..=N`, via row and column sums.
    fn prefix_suffix(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid;
        let scale = SQRT_2 / n as f64;
        let mut col = vec![0.0; n];
        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            let row = self.row(i);
            prefix[i + 1] = prefix[i] + row.iter().sum::<f64>();
            for (c, &x) in col.iter_mut().zip(row) {
                *c += x;
            }
        }
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + col[k];
        }
        (
            prefix.into_iter().map(|v| v * scale).collect(),
            suffix.into_iter().map(|v| v * scale).collect(),
        )
    }

    /// `G0(k/N)` for `k = 1..N-1` (index `k`; entries 0 and N are zero).
    pub fn g0_path(&self) -> Vec<f64> {
        let n = self.grid;
        let (prefix, suffix) = self.prefix_suffix();
        let total = prefix[n];
        let mut g = vec![0.0; n + 1];
        for k in 1..n {
            let r = k as f64 / n as f64;
            g[k] = total - prefix[k] / r - suffix[k] / (1.0 - r);
        }
        g
    }

    /// `max_{4 <= k <= N-4} r(1-r) G0(r)`.
    pub fn sup_statistic(&self) -> f64 {
        let n = self.grid;
        let g = self.g0_path();
        (4..=n - 4)
            .map(|k| {
                let r = k as f64 / n as f64;
                r * (1.0 - r) * g[k]
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One draw of the limit statistic from the pair-array construction.
pub fn sample_sup_statistic_pair_array(grid: usize, seed: u64) -> Result<f64> {
    let mut rng = substream(seed, rng::DOMAIN_LIMIT_PAIR_ARRAY, 0);
    Ok(GaussianPairArray::sample(grid, &mut rng)?.sup_statistic())
}

/// One draw of `M_n` on i.i.d. standard Gaussian data: `(argmax, value)`.
pub fn sample_mn_null_data_based(n: usize, p: usize, seed: u64) -> Result<(usize, f64)> {
    let mut rng = substream(seed, rng::DOMAIN_LIMIT_DATA, 0);
    data_based_draw(n, p, &mut rng)
}

fn data_based_draw<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<(usize, f64)> {
    if n < 8 || p == 0 {
        return Err(Error::Config(format!(
            "data-based sampler needs n >= 8 and p >= 1, got n={n}, p={p}"
        )));
    }
    let values = (0..n * p)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let data = DataMatrix::new(n, p, values)?;
    let d = pairwise_matrix(&data, &GroupingScheme::l1_sqrt(p)?)?;
    scan_max(&d, 1, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub probs: Vec<f64>,
    pub quants: Vec<f64>,
    /// Bootstrap standard errors of each quantile estimate.
    pub std_errors: Vec<f64>,
    pub reps: usize,
    pub method: Option<LimitMethod>,
    pub seed: Option<u64>,
}

impl QuantileTable {
    /// Table with the given `(prob, quantile)` entries and no provenance.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        QuantileTable {
            probs: pairs.iter().map(|p| p.0).collect(),
            quants: pairs.iter().map(|p| p.1).collect(),
            std_errors: vec![f64::NAN; pairs.len()],
            reps: 0,
            method: None,
            seed: None,
        }
    }

    pub fn quantile_at(&self, prob: f64) -> Option<f64> {
        self.probs
            .iter()
            .position(|&p| (p - prob).abs() < 1e-9)
            .map(|i| self.quants[i])
    }

    /// CSV with header `prob,quantile`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prob,quantile\n");
        for (p, q) in self.probs.iter().zip(&self.quants) {
            out.push_str(&format!("{p},{q}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["prob", "quantile"] {
            return Err(Error::Data(
                "quantile table header must be \"prob,quantile\"".into(),
            ));
        }
        let mut pairs = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Data(format!("quantile table row {}: bad number", i + 2)))
            };
            pairs.push((parse(0)?, parse(1)?));
        }
        Ok(Self::from_pairs(&pairs))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

const BOOTSTRAP_RESAMPLES: usize = 200;

/// Draws `reps` replicates of the chosen sampler and reports the
/// `ceil(q * reps)`-th order statistic for each probability.
pub fn estimate_quantiles(
    method: LimitMethod,
    reps: usize,
    probs: &[f64],
    seed: u64,
) -> Result<QuantileTable> {
    if reps < 100 {
        return Err(Error::Config(format!(
            "at least 100 replicates are required, got {reps}"
        )));
    }
    if probs.is_empty() || probs.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::Config("probabilities must lie in (0, 1)".into()));
    }
    let draws = sample_replicates(method, reps, seed)?;
    let quants: Vec<f64> = probs.iter().map(|&q| order_statistic(&draws, q)).collect();

    let mut boot_rng = substream(seed, rng::DOMAIN_LIMIT_DATA ^ 0xB007, 0);
    let mut boot = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); probs.len()];
    let mut resample = vec![0.0; reps];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for x in resample.iter_mut() {
            *x = draws[boot_rng.random_range(0..reps)];
        }
        for (i, &q) in probs.iter().enumerate() {
            boot[i].push(order_statistic(&resample, q));
        }
    }
    let std_errors = boot
        .iter()
        .map(|b| {
            let mean = b.iter().sum::<f64>() / b.len() as f64;
            (b.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b.len() - 1) as f64).sqrt()
        })
        .collect();

    Ok(QuantileTable {
        probs: probs.to_vec(),
        quants,
        std_errors,
        reps,
        method: Some(method),
        seed: Some(seed),
    })
}

/// Raw replicate draws, in replicate order.
pub fn sample_replicates(method: LimitMethod, reps: usize, seed: u64) -> Result<Vec<f64>> {
    match method {
        LimitMethod::PairArray { grid } => {
            if grid < 8 {
                return Err(Error::Config(format!(
                    "grid must be at least 8, got {grid}"
                )));
            }
            Ok(map_init(
                reps,
                || (),
                |_, j| {
                    let mut rng = substream(seed, rng::DOMAIN_LIMIT_PAIR_ARRAY, j as u64);
                    GaussianPairArray::sample(grid, &mut rng)
                        .expect("grid validated")
                        .sup_statistic()
                },
            ))
        }
        LimitMethod::DataBased { n, p } => {
            if n < 8 || p == 0 {
                return Err(Error::Config(format!(
                    "data-based sampler needs n >= 8 and p >= 1, got n={n}, p={p}"
                )));
            }
            map_init(
                reps,
                || (),
                |_, j| {
                    let mut rng = substream(seed, rng::DOMAIN_LIMIT_DATA, j as u64);
                    data_based_draw(n, p, &mut rng).map(|(_, v)| v)
                },
            )
            .into_iter()
            .collect()
        }
    }
}
