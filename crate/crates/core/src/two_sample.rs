//! Generalized energy distance and the studentized two-sample statistic.
//!
//! Every function here reads a shared [`DistanceMatrix`] through 0-based index
//! sets, so a sample split never recomputes a distance. These are direct
//! transcriptions of the estimators; the scan module has an incremental
//! kernel for sweeping many splits that is checked against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

/// Pooled variances at or below this value are treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Dense row-major matrix returned by the centering operations.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleResult {
    pub e_stat: f64,
    pub s2: f64,
    pub a_nm: f64,
    pub t: f64,
    pub n: usize,
    pub m: usize,
    pub degenerate: bool,
}

/// `a_nm = sqrt(1/(nm) + 1/(2n(n-1)) + 1/(2m(m-1)))`.
pub fn a_nm(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (1.0 / (n * m) + 1.0 / (2.0 * n * (n - 1.0)) + 1.0 / (2.0 * m * (m - 1.0))).sqrt()
}

/// Assembles the studentized statistic from its parts, applying the
/// zero-variance convention.
pub fn studentize(e_stat: f64, s2: f64, n: usize, m: usize) -> TwoSampleResult {
    let s2 = s2.max(0.0);
    let a = a_nm(n, m);
    let degenerate = s2 <= DEGENERACY_TOL;
    let t = if degenerate {
        0.0
    } else {
        e_stat / (a * s2.sqrt())
    };
    TwoSampleResult {
        e_stat,
        s2,
        a_nm: a,
        t,
        n,
        m,
        degenerate,
    }
}

fn check_indices(d: &DistanceMatrix, idx: &[usize]) -> Result<()> {
    if let Some(&i) = idx.iter().find(|&&i| i >= d.n()) {
        return Err(Error::Data(format!(
            "row index {i} out of range for {} observations",
            d.n()
        )));
    }
    Ok(())
}

fn check_pair(d: &DistanceMatrix, a: &[usize], b: &[usize], min: usize) -> Result<()> {
    check_indices(d, a)?;
    check_indices(d, b)?;
    for (what, got) in [("first sample", a.len()), ("second sample", b.len())] {
        if got < min {
            return Err(Error::TooSmall { what, min, got });
        }
    }
    let mut seen = vec![false; d.n()];
    for &i in a {
        seen[i] = true;
    }
    if let Some(&i) = b.iter().find(|&&i| seen[i]) {
        return Err(Error::Overlap(i));
    }
    Ok(())
}

fn within_sum(d: &DistanceMatrix, idx: &[usize]) -> f64 {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| d.get(i, j)).sum::<f64>())
        .sum()
}

fn cross_sum(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .map(|&i| b.iter().map(|&j| d.get(i, j)).sum::<f64>())
        .sum()
}

/// U-statistic estimator of the generalized energy distance.
pub fn energy_u_stat(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    check_pair(d, a, b, 2)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    Ok(2.0 * cross_sum(d, a, b) / (n * m)
        - within_sum(d, a) / (n * (n - 1.0))
        - within_sum(d, b) / (m * (m - 1.0)))
}

/// U-centered within-sample matrix; entry `(k, k')` for all positions,
/// including the diagonal, with row and grand sums taken over the full set.
pub fn u_center_within(d: &DistanceMatrix, idx: &[usize]) -> Result<Matrix> {
    check_indices(d, idx)?;
    let n = idx.len();
    if n < 3 {
        return Err(Error::TooSmall {
            what: "U-centering",
            min: 3,
            got: n,
        });
    }
    let row_sums: Vec<f64> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| d.get(i, j)).sum())
        .collect();
    let total: f64 = row_sums.iter().sum();
    let nf = n as f64;
    let mut out = Matrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        for (kp, &j) in idx.iter().enumerate() {
            let v = d.get(i, j) - row_sums[k] / (nf - 2.0) - row_sums[kp] / (nf - 2.0)
                + total / ((nf - 1.0) * (nf - 2.0));
            out.set(k, kp, v);
        }
    }
    Ok(out)
}

/// Double-centered cross-distance matrix between two disjoint samples.
pub fn double_center_cross(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<Matrix> {
    check_pair(d, a, b, 1)?;
    let (n, m) = (a.len(), b.len());
    let row_means: Vec<f64> = a
        .iter()
        .map(|&i| b.iter().map(|&j| d.get(i, j)).sum::<f64>() / m as f64)
        .collect();
    let col_means: Vec<f64> = b
        .iter()
        .map(|&j| a.iter().map(|&i| d.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let grand = cross_sum(d, a, b) / (n * m) as f64;
    let mut out = Matrix::zeros(n, m);
    for (k, &i) in a.iter().enumerate() {
        for (l, &j) in b.iter().enumerate() {
            out.set(k, l, d.get(i, j) - col_means[l] - row_means[k] + grand);
        }
    }
    Ok(out)
}

/// Unbiased sample distance variance of one sample.
pub fn distance_variance(d: &DistanceMatrix, idx: &[usize]) -> Result<f64> {
    let n = idx.len();
    if n < 4 {
        return Err(Error::TooSmall {
            what: "distance variance",
            min: 4,
            got: n,
        });
    }
    let a = u_center_within(d, idx)?;
    let mut sum = 0.0;
    for k in 0..n {
        for kp in 0..n {
            if k != kp {
                sum += a.get(k, kp).powi(2);
            }
        }
    }
    let nf = n as f64;
    Ok(sum / (nf * (nf - 3.0)))
}

/// Cross distance covariance between two disjoint samples.
pub fn cross_distance_covariance(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    check_pair(d, a, b, 2)?;
    let c = double_center_cross(d, a, b)?;
    let sum: f64 = c.data.iter().map(|v| v * v).sum();
    Ok(sum / ((a.len() - 1) * (b.len() - 1)) as f64)
}

fn v(a: usize) -> f64 {
    let a = a as f64;
    a * (a - 3.0) / 2.0
}

/// Pooled variance estimator combining both distance variances and the
/// cross covariance.
pub fn pooled_variance(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    check_pair(d, a, b, 4)?;
    let (n, m) = (a.len(), b.len());
    let (vn, vm) = (v(n), v(m));
    let nm1 = ((n - 1) * (m - 1)) as f64;
    let num = 4.0 * vn * distance_variance(d, a)?
        + 4.0 * vm * distance_variance(d, b)?
        + 4.0 * nm1 * cross_distance_covariance(d, a, b)?;
    Ok(num / (vn + vm + nm1))
}

/// Studentized two-sample statistic `T = E / (a_nm * S)`.
pub fn t_statistic(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<TwoSampleResult> {
    check_pair(d, a, b, 4)?;
    let e = energy_u_stat(d, a, b)?;
    let s2 = pooled_variance(d, a, b)?;
    Ok(studentize(e, s2, a.len(), b.len()))
}
