//! Incremental sweep of the two-sample statistic over all splits of a
//! contiguous block.
//!
//! A split of a block of `len` observations into a left part of size `n`
//! and a right part of size `m = len - n` needs, besides plain sums, the
//! sums of squared U-centered and double-centered entries. With row sums
//! `r_k` and total `S` of a within-sample block, and `W2` its sum of squared
//! entries,
//!
//! ```text
//! sum_{k != k'} a~^2 = W2 - 2 sum_k r_k^2 / (n-2) + S^2 / ((n-1)(n-2))
//! sum_{k,l}     d~^2 = X2 - sum_l c_l^2 / n - sum_k r_k^2 / m + S_X^2 / (nm)
//! ```
//!
//! Maintaining the column sums of the left part (`left_sum`) and of its
//! squares (`left_sq`) as the split moves right makes each split `O(len)`,
//! so the full sweep is `O(len^2)`.
//!
//! Every statistic involved is unchanged when a constant is added to all
//! off-diagonal distances, so blocks store distances minus their
//! off-diagonal mean, which keeps the squared sums well conditioned.

use crate::metric::DistanceMatrix;
use crate::two_sample::{studentize, TwoSampleResult};

/// Off-diagonal-centered copy of `d` restricted to (and reordered by) `order`.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    len: usize,
    w: Vec<f64>,
}

impl Block {
    pub(crate) fn new(d: &DistanceMatrix, order: &[usize]) -> Self {
        let len = order.len();
        let mut w = vec![0.0; len * len];
        let mut total = 0.0;
        for (a, &i) in order.iter().enumerate() {
            let row = d.row(i);
            let out = &mut w[a * len..(a + 1) * len];
            for (b, &j) in order.iter().enumerate() {
                out[b] = row[j];
            }
            total += out.iter().sum::<f64>();
        }
        let shift = if len > 1 {
            total / (len * (len - 1)) as f64
        } else {
            0.0
        };
        for a in 0..len {
            for b in 0..len {
                if a != b {
                    w[a * len + b] -= shift;
                }
            }
        }
        Block { len, w }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }
}

/// Scratch buffers reused across sweeps.
#[derive(Debug, Default)]
pub(crate) struct SplitScanner {
    full: Vec<f64>,
    left_sum: Vec<f64>,
    left_sq: Vec<f64>,
}

impl SplitScanner {
    /// Visits every split of `block[lo..hi)` with both parts of size at least
    /// 4, calling `visit(n, result)` with the left size `n` in increasing order.
    pub(crate) fn sweep(
        &mut self,
        block: &Block,
        lo: usize,
        hi: usize,
        mut visit: impl FnMut(usize, TwoSampleResult),
    ) {
        let len = hi - lo;
        if len < 8 {
            return;
        }
        let stride = block.len;
        let row = |i: usize| &block.w[(lo + i) * stride + lo..(lo + i) * stride + hi];

        self.full.clear();
        self.left_sum.clear();
        self.left_sq.clear();
        self.full.resize(len, 0.0);
        self.left_sum.resize(len, 0.0);
        self.left_sq.resize(len, 0.0);

        let mut total_sq = 0.0;
        for i in 0..len {
            let r = row(i);
            self.full[i] = r.iter().sum();
            total_sq += r.iter().map(|x| x * x).sum::<f64>();
        }

        for n in 1..=len - 4 {
            let added = row(n - 1);
            for ((ls, lq), &x) in self.left_sum.iter_mut().zip(&mut self.left_sq).zip(added) {
                *ls += x;
                *lq += x * x;
            }
            if n < 4 {
                continue;
            }
            let m = len - n;

            let (mut s_left, mut r2_left, mut w2_left, mut r2_cross_rows) = (0.0, 0.0, 0.0, 0.0);
            for t in 0..n {
                let l = self.left_sum[t];
                s_left += l;
                r2_left += l * l;
                w2_left += self.left_sq[t];
                let c = self.full[t] - l;
                r2_cross_rows += c * c;
            }
            let (mut s_cross, mut c2_cross_cols, mut x2, mut s_right, mut r2_right) =
                (0.0, 0.0, 0.0, 0.0, 0.0);
            for t in n..len {
                let l = self.left_sum[t];
                s_cross += l;
                c2_cross_cols += l * l;
                x2 += self.left_sq[t];
                let r = self.full[t] - l;
                s_right += r;
                r2_right += r * r;
            }
            let w2_right = total_sq - w2_left - 2.0 * x2;

            let (nf, mf) = (n as f64, m as f64);
            let e_stat = 2.0 * s_cross / (nf * mf)
                - s_left / (nf * (nf - 1.0))
                - s_right / (mf * (mf - 1.0));
            let a2 =
                w2_left - 2.0 * r2_left / (nf - 2.0) + s_left * s_left / ((nf - 1.0) * (nf - 2.0));
            let b2 = w2_right - 2.0 * r2_right / (mf - 2.0)
                + s_right * s_right / ((mf - 1.0) * (mf - 2.0));
            let d2 = x2 - c2_cross_cols / nf - r2_cross_rows / mf + s_cross * s_cross / (nf * mf);
            let vn = nf * (nf - 3.0) / 2.0;
            let vm = mf * (mf - 3.0) / 2.0;
            let nm1 = (nf - 1.0) * (mf - 1.0);
            let s2 = (2.0 * a2 + 2.0 * b2 + 4.0 * d2) / (vn + vm + nm1);
            visit(n, studentize(e_stat, s2, n, m));
        }
    }
}

/// Weight `(e-b)(b-s+1)/(e-s+1)^2` for a left part of size `n` out of `len`.
#[inline]
pub(crate) fn split_weight(n: usize, len: usize) -> f64 {
    (n * (len - n)) as f64 / (len * len) as f64
}

/// Best weighted split of `block[lo..hi)`: `(left size, weighted value)`.
/// Degenerate splits are skipped; `None` when every split is degenerate.
pub(crate) fn best_split(
    scanner: &mut SplitScanner,
    block: &Block,
    lo: usize,
    hi: usize,
) -> Option<(usize, f64)> {
    let len = hi - lo;
    let mut best: Option<(usize, f64)> = None;
    scanner.sweep(block, lo, hi, |n, r| {
        if r.degenerate {
            return;
        }
        let v = split_weight(n, len) * r.t;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((n, v));
        }
    });
    best
}
