//! Permutation-calibrated single change-point test and wild binary
//! segmentation for multiple change-points.
//!
//! Permutation replicates relabel rows and columns of the precomputed
//! distance matrix; distances are never recomputed.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{best_split, Block, SplitScanner};
use crate::limitdist::QuantileTable;
use crate::metric::{pairwise_matrix, DataMatrix, DistanceMatrix, GroupingScheme};
use crate::par::map_init;
use crate::rng::{self, substream};
use crate::scan::{scan_max, MIN_SEGMENT};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 199;
pub const DEFAULT_INTERVALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub alpha: f64,
    /// Number of permutation replicates `B`.
    pub permutations: usize,
    /// Number of wild intervals `M`.
    pub intervals: usize,
    pub seed: u64,
    /// Smallest scannable segment; fixed.
    pub min_segment: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            alpha: DEFAULT_ALPHA,
            permutations: DEFAULT_PERMUTATIONS,
            intervals: DEFAULT_INTERVALS,
            seed: 0,
            min_segment: MIN_SEGMENT,
        }
    }
}

impl DetectConfig {
    pub fn new(alpha: f64, permutations: usize, intervals: usize, seed: u64) -> Result<Self> {
        let c = DetectConfig {
            alpha,
            permutations,
            intervals,
            seed,
            min_segment: MIN_SEGMENT,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.permutations == 0 {
            return Err(Error::Config(
                "at least one permutation replicate is required".into(),
            ));
        }
        if self.intervals == 0 {
            return Err(Error::Config(
                "at least one wild interval is required".into(),
            ));
        }
        if self.min_segment != MIN_SEGMENT {
            return Err(Error::Config(format!(
                "min_segment is fixed at {MIN_SEGMENT}"
            )));
        }
        Ok(())
    }
}

/// 1-based index of the order statistic used as the `q`-quantile of `count`
/// values: `ceil(q * count)`, clamped to `1..=count`.
pub fn order_statistic_rank(q: f64, count: usize) -> usize {
    // The small offset keeps products such as 0.9 * 2000 from rounding up.
    let k = (q * count as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(count)
}

/// `ceil(q * len)`-th smallest value.
pub fn order_statistic(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[order_statistic_rank(q, sorted.len()) - 1]
}

/// Uniform random permutation of `0..n` from the stream `(seed, replicate_id)`.
pub fn permute_indices(n: usize, seed: u64, replicate_id: u64) -> Vec<usize> {
    let mut rng = substream(seed, rng::DOMAIN_SINGLE_PERMUTATION, replicate_id);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    Permutation,
    /// Threshold read from a precomputed limit-law quantile table.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleResult {
    /// Candidate change-point: last index of the left segment (1-based).
    pub tau_hat: usize,
    pub m_n: f64,
    pub threshold: f64,
    /// `(1 + #{replicates >= m_n}) / (B + 1)`; absent for asymptotic calibration.
    pub p_value: Option<f64>,
    pub rejected: bool,
    pub permutations: usize,
    pub alpha: f64,
    pub calibration: Calibration,
}

fn full_range_max(scanner: &mut SplitScanner, d: &DistanceMatrix, order: &[usize]) -> f64 {
    let block = Block::new(d, order);
    best_split(scanner, &block, 0, block.len()).map_or(0.0, |(_, v)| v)
}

/// Single change-point test on a precomputed distance matrix.
pub fn single_test_on_matrix(d: &DistanceMatrix, config: &DetectConfig) -> Result<SingleResult> {
    config.validate()?;
    let n = d.n();
    let (tau_hat, m_n) = scan_max(d, 1, n)?;
    let replicates = map_init(config.permutations, SplitScanner::default, |scanner, j| {
        let perm = permute_indices(n, config.seed, j as u64);
        full_range_max(scanner, d, &perm)
    });
    let threshold = order_statistic(&replicates, 1.0 - config.alpha);
    let exceed = replicates.iter().filter(|&&v| v >= m_n).count();
    Ok(SingleResult {
        tau_hat,
        m_n,
        threshold,
        p_value: Some((1 + exceed) as f64 / (config.permutations + 1) as f64),
        rejected: m_n > threshold,
        permutations: config.permutations,
        alpha: config.alpha,
        calibration: Calibration::Permutation,
    })
}

/// Single change-point test: builds the distance matrix, then calibrates
/// with `B` permutation replicates.
pub fn single_changepoint_test(
    data: &DataMatrix,
    scheme: &GroupingScheme,
    config: &DetectConfig,
) -> Result<SingleResult> {
    if data.n() < MIN_SEGMENT {
        return Err(Error::TooSmall {
            what: "single change-point test",
            min: MIN_SEGMENT,
            got: data.n(),
        });
    }
    config.validate()?;
    let d = pairwise_matrix(data, scheme)?;
    single_test_on_matrix(&d, config)
}

/// Single test thresholded by the `1 - alpha` entry of a limit-law table.
pub fn single_test_asymptotic(
    d: &DistanceMatrix,
    table: &QuantileTable,
    alpha: f64,
) -> Result<SingleResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let threshold = table.quantile_at(1.0 - alpha).ok_or_else(|| {
        Error::Config(format!(
            "quantile table has no entry for probability {}",
            1.0 - alpha
        ))
    })?;
    let (tau_hat, m_n) = scan_max(d, 1, d.n())?;
    Ok(SingleResult {
        tau_hat,
        m_n,
        threshold,
        p_value: None,
        rejected: m_n > threshold,
        permutations: 0,
        alpha,
        calibration: Calibration::Asymptotic,
    })
}

/// Wild interval `(s_m, e_m)`, 1-based inclusive, at least 8 observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub s: usize,
    pub e: usize,
}

impl Interval {
    pub fn new(s: usize, e: usize, n: usize) -> Result<Self> {
        if s == 0 || s + 7 > e || e > n {
            return Err(Error::Data(format!(
                "interval ({s}, {e}) needs 1 <= s, s + 7 <= e <= {n}"
            )));
        }
        Ok(Interval { s, e })
    }
}

/// Draws `count` intervals: `s` uniform on `1..=n-7`, then `e` uniform on
/// `s+7..=n`.
pub fn draw_intervals(n: usize, count: usize, seed: u64) -> Result<Vec<Interval>> {
    if n < MIN_SEGMENT {
        return Err(Error::TooSmall {
            what: "interval sampling",
            min: MIN_SEGMENT,
            got: n,
        });
    }
    let mut rng = substream(seed, rng::DOMAIN_INTERVALS, 0);
    Ok((0..count)
        .map(|_| {
            let s = rng.random_range(1..=n - 7);
            let e = rng.random_range(s + 7..=n);
            Interval { s, e }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMax {
    /// Position of the winning interval in the interval list.
    pub m: usize,
    pub b: usize,
    pub value: f64,
}

fn candidates(intervals: &[Interval], s: usize, e: usize) -> Vec<(usize, Interval)> {
    intervals
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, iv)| s <= iv.s && iv.e <= e)
        .collect()
}

/// Maximum over candidate intervals of a block covering `(s, e)`; `block`
/// row 0 is time `s`. Ties keep the first interval, then the smallest split.
fn block_segment_max(
    scanner: &mut SplitScanner,
    block: &Block,
    s: usize,
    cands: &[(usize, Interval)],
) -> SegmentMax {
    let mut best: Option<SegmentMax> = None;
    for &(m, iv) in cands {
        let lo = iv.s - s;
        let hi = iv.e - s + 1;
        if let Some((n_left, v)) = best_split(scanner, block, lo, hi) {
            if best.is_none_or(|b| v > b.value) {
                best = Some(SegmentMax {
                    m,
                    b: iv.s + n_left - 1,
                    value: v,
                });
            }
        }
    }
    best.unwrap_or_else(|| {
        let (m, iv) = cands[0];
        SegmentMax {
            m,
            b: iv.s + 3,
            value: 0.0,
        }
    })
}

/// Best weighted split over all intervals inside `(s, e)`; `None` when no
/// interval fits.
pub fn wbs_segment_max(
    d: &DistanceMatrix,
    intervals: &[Interval],
    s: usize,
    e: usize,
) -> Result<Option<SegmentMax>> {
    crate::scan::check_segment(d.n(), s, e)?;
    let cands = candidates(intervals, s, e);
    if cands.is_empty() {
        return Ok(None);
    }
    let order: Vec<usize> = (s - 1..e).collect();
    let block = Block::new(d, &order);
    Ok(Some(block_segment_max(
        &mut SplitScanner::default(),
        &block,
        s,
        &cands,
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    /// Last index of the left regime (1-based).
    pub tau: usize,
    /// First index of the new regime, `tau + 1`.
    pub new_regime_start: usize,
    /// Segment `(s, e)` whose recursion produced this point.
    pub segment: (usize, usize),
    /// Wild interval that attained the maximum.
    pub interval: (usize, usize),
    pub statistic: f64,
    pub threshold: f64,
    /// Absent when the threshold came from a quantile table.
    pub p_value: Option<f64>,
    /// Order in which the recursion accepted this point, from 0.
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSet {
    pub locations: Vec<usize>,
    /// Sorted by location.
    pub details: Vec<ChangePoint>,
    pub config: DetectConfig,
}

/// Wild binary segmentation with a fixed interval set.
pub fn wbs_with_intervals(
    d: &DistanceMatrix,
    intervals: &[Interval],
    config: &DetectConfig,
) -> Result<ChangePointSet> {
    config.validate()?;
    let n = d.n();
    if n < MIN_SEGMENT {
        return Err(Error::TooSmall {
            what: "wild binary segmentation",
            min: MIN_SEGMENT,
            got: n,
        });
    }
    for iv in intervals {
        Interval::new(iv.s, iv.e, n)?;
    }
    let mut found = Vec::new();
    let mut stack = vec![(1usize, n)];
    // Depth-first, left segment before right.
    while let Some((s, e)) = stack.pop() {
        if e < s + 7 {
            continue;
        }
        let cands = candidates(intervals, s, e);
        if cands.is_empty() {
            continue;
        }
        let order: Vec<usize> = (s - 1..e).collect();
        let block = Block::new(d, &order);
        let best = block_segment_max(&mut SplitScanner::default(), &block, s, &cands);
        let domain = rng::wbs_node_domain(s, e);
        let replicates = map_init(config.permutations, SplitScanner::default, |scanner, j| {
            let mut rng = substream(config.seed, domain, j as u64);
            let mut perm = order.clone();
            perm.shuffle(&mut rng);
            let block = Block::new(d, &perm);
            block_segment_max(scanner, &block, s, &cands).value
        });
        let threshold = order_statistic(&replicates, 1.0 - config.alpha);
        if best.value > threshold {
            let exceed = replicates.iter().filter(|&&v| v >= best.value).count();
            let iv = intervals[best.m];
            found.push(ChangePoint {
                tau: best.b,
                new_regime_start: best.b + 1,
                segment: (s, e),
                interval: (iv.s, iv.e),
                statistic: best.value,
                threshold,
                p_value: Some((1 + exceed) as f64 / (config.permutations + 1) as f64),
                generation: found.len(),
            });
            stack.push((best.b + 1, e));
            stack.push((s, best.b));
        }
    }
    found.sort_by_key(|c| c.tau);
    Ok(ChangePointSet {
        locations: found.iter().map(|c| c.tau).collect(),
        details: found,
        config: *config,
    })
}

/// Wild binary segmentation on a precomputed distance matrix.
pub fn wbs_on_matrix(d: &DistanceMatrix, config: &DetectConfig) -> Result<ChangePointSet> {
    config.validate()?;
    let intervals = draw_intervals(d.n(), config.intervals, config.seed)?;
    wbs_with_intervals(d, &intervals, config)
}

/// Multiple change-point detection by wild binary segmentation.
pub fn wbs_detect(
    data: &DataMatrix,
    scheme: &GroupingScheme,
    config: &DetectConfig,
) -> Result<ChangePointSet> {
    if data.n() < MIN_SEGMENT {
        return Err(Error::TooSmall {
            what: "wild binary segmentation",
            min: MIN_SEGMENT,
            got: data.n(),
        });
    }
    config.validate()?;
    let d = pairwise_matrix(data, scheme)?;
    wbs_on_matrix(&d, config)
}
