//! Weighted split profiles, the single change-point statistic and its
//! argmax, and the embedded-space CUSUM norm.
//!
//! Times are 1-based and inclusive: a segment `(s, e)` covers observations
//! `X_s..=X_e`, and a split `b` puts `X_s..=X_b` on the left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{split_weight, Block, SplitScanner};
use crate::metric::DistanceMatrix;

/// Smallest segment on which a split can be scanned.
pub const MIN_SEGMENT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanProfile {
    pub s: usize,
    pub e: usize,
    /// Candidate splits `s+3..=e-4`.
    pub bs: Vec<usize>,
    pub weights: Vec<f64>,
    pub t: Vec<f64>,
    /// `weights[i] * t[i]`.
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub best_b: usize,
    pub best_value: f64,
}

pub(crate) fn check_segment(n: usize, s: usize, e: usize) -> Result<()> {
    if s == 0 || e > n || s > e {
        return Err(Error::Data(format!(
            "segment ({s}, {e}) is not inside 1..={n}"
        )));
    }
    if e - s + 1 < MIN_SEGMENT {
        return Err(Error::TooSmall {
            what: "segment scan",
            min: MIN_SEGMENT,
            got: e - s + 1,
        });
    }
    Ok(())
}

/// Weighted statistic `((e-b)(b-s+1)/(e-s+1)^2) * T(X_s..b, X_b+1..e)` at every
/// admissible split of `(s, e)`.
pub fn weighted_t_profile(d: &DistanceMatrix, s: usize, e: usize) -> Result<ScanProfile> {
    check_segment(d.n(), s, e)?;
    let order: Vec<usize> = (s - 1..e).collect();
    let block = Block::new(d, &order);
    let len = block.len();
    let cap = len - 7;
    let mut profile = ScanProfile {
        s,
        e,
        bs: Vec::with_capacity(cap),
        weights: Vec::with_capacity(cap),
        t: Vec::with_capacity(cap),
        values: Vec::with_capacity(cap),
        degenerate: Vec::with_capacity(cap),
        best_b: s + 3,
        best_value: 0.0,
    };
    let mut best: Option<(usize, f64)> = None;
    SplitScanner::default().sweep(&block, 0, len, |n, r| {
        let b = s + n - 1;
        let w = split_weight(n, len);
        let v = w * r.t;
        profile.bs.push(b);
        profile.weights.push(w);
        profile.t.push(r.t);
        profile.values.push(v);
        profile.degenerate.push(r.degenerate);
        if !r.degenerate && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((b, v));
        }
    });
    if let Some((b, v)) = best {
        profile.best_b = b;
        profile.best_value = v;
    }
    Ok(profile)
}

/// `(argmax, max)` of the weighted profile; ties go to the smallest split and
/// degenerate splits never win. An all-degenerate profile gives `(s+3, 0)`.
pub fn scan_max(d: &DistanceMatrix, s: usize, e: usize) -> Result<(usize, f64)> {
    let p = weighted_t_profile(d, s, e)?;
    Ok((p.best_b, p.best_value))
}

/// Squared Hilbert norm of the embedded CUSUM process at `k` (1-based,
/// `1 <= k <= n-1`), written in terms of distances only. Double sums run over
/// ordered pairs and include the zero diagonal.
pub fn cusum_sqnorm(d: &DistanceMatrix, k: usize) -> Result<f64> {
    let n = d.n();
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Data(format!(
            "CUSUM index {k} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    let (mut cross, mut left, mut right) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let row = d.row(i);
        if i < k {
            left += row[..k].iter().sum::<f64>();
            cross += row[k..].iter().sum::<f64>();
        } else {
            right += row[k..].iter().sum::<f64>();
        }
    }
    let (kf, nf) = (k as f64, n as f64);
    let rest = nf - kf;
    let bracket = 2.0 / (kf * rest) * cross - left / (kf * kf) - right / (rest * rest);
    Ok(kf * kf * rest * rest / (2.0 * nf.powi(3)) * bracket)
}
