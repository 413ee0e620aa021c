#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_distr::StandardNormal;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-14
}

pub fn random_rows<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

pub fn gaussian_rows<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// Direct transcriptions of the two-sample formulas, one loop per sum.
pub mod naive {
    pub fn l1_sqrt(x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            .sqrt()
    }

    /// Edge groups `{i, i+1}` with Euclidean base distance.
    pub fn chain_graph(x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() - 1 {
            s += ((x[i] - y[i]).powi(2) + (x[i + 1] - y[i + 1]).powi(2)).sqrt();
        }
        s.sqrt()
    }

    pub struct Stats {
        pub e: f64,
        pub d2_a: f64,
        pub d2_b: f64,
        pub c: f64,
        pub s2: f64,
        pub t: f64,
    }

    pub fn u_center(dist: &dyn Fn(usize, usize) -> f64, idx: &[usize]) -> Vec<Vec<f64>> {
        let n = idx.len();
        let nf = n as f64;
        let mut out = vec![vec![0.0; n]; n];
        for k in 0..n {
            for kp in 0..n {
                if k == kp {
                    continue;
                }
                let mut row = 0.0;
                for j in 0..n {
                    row += dist(idx[k], idx[j]);
                }
                let mut col = 0.0;
                for i in 0..n {
                    col += dist(idx[i], idx[kp]);
                }
                let mut all = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        all += dist(idx[i], idx[j]);
                    }
                }
                out[k][kp] = dist(idx[k], idx[kp]) - row / (nf - 2.0) - col / (nf - 2.0)
                    + all / ((nf - 1.0) * (nf - 2.0));
            }
        }
        out
    }

    pub fn double_center(
        dist: &dyn Fn(usize, usize) -> f64,
        a: &[usize],
        b: &[usize],
    ) -> Vec<Vec<f64>> {
        let (n, m) = (a.len(), b.len());
        let mut out = vec![vec![0.0; m]; n];
        for k in 0..n {
            for l in 0..m {
                let mut col = 0.0;
                for kk in 0..n {
                    col += dist(a[kk], b[l]);
                }
                let mut row = 0.0;
                for ll in 0..m {
                    row += dist(a[k], b[ll]);
                }
                let mut all = 0.0;
                for kk in 0..n {
                    for ll in 0..m {
                        all += dist(a[kk], b[ll]);
                    }
                }
                out[k][l] =
                    dist(a[k], b[l]) - col / n as f64 - row / m as f64 + all / (n * m) as f64;
            }
        }
        out
    }

    pub fn two_sample(dist: &dyn Fn(usize, usize) -> f64, a: &[usize], b: &[usize]) -> Stats {
        let (n, m) = (a.len(), b.len());
        let (nf, mf) = (n as f64, m as f64);
        let mut cross = 0.0;
        for &i in a {
            for &j in b {
                cross += dist(i, j);
            }
        }
        let mut within_a = 0.0;
        for &i in a {
            for &j in a {
                if i != j {
                    within_a += dist(i, j);
                }
            }
        }
        let mut within_b = 0.0;
        for &i in b {
            for &j in b {
                if i != j {
                    within_b += dist(i, j);
                }
            }
        }
        let e =
            2.0 / (nf * mf) * cross - within_a / (nf * (nf - 1.0)) - within_b / (mf * (mf - 1.0));

        let dvar = |idx: &[usize]| {
            let u = u_center(dist, idx);
            let k = idx.len() as f64;
            let mut s = 0.0;
            for i in 0..idx.len() {
                for j in 0..idx.len() {
                    if i != j {
                        s += u[i][j] * u[i][j];
                    }
                }
            }
            s / (k * (k - 3.0))
        };
        let d2_a = dvar(a);
        let d2_b = dvar(b);
        let dt = double_center(dist, a, b);
        let mut c = 0.0;
        for row in &dt {
            for x in row {
                c += x * x;
            }
        }
        c /= (nf - 1.0) * (mf - 1.0);
        let vn = nf * (nf - 3.0) / 2.0;
        let vm = mf * (mf - 3.0) / 2.0;
        let cross_w = (nf - 1.0) * (mf - 1.0);
        let s2 = (4.0 * vn * d2_a + 4.0 * vm * d2_b + 4.0 * cross_w * c) / (vn + vm + cross_w);
        let a_nm =
            (1.0 / (nf * mf) + 1.0 / (2.0 * nf * (nf - 1.0)) + 1.0 / (2.0 * mf * (mf - 1.0)))
                .sqrt();
        let t = e / (a_nm * s2.sqrt());
        Stats {
            e,
            d2_a,
            d2_b,
            c,
            s2,
            t,
        }
    }

    /// Exhaustive weighted scan over `(s, e)`, 1-based; `(argmax, max)`.
    pub fn scan(dist: &dyn Fn(usize, usize) -> f64, s: usize, e: usize) -> (usize, f64) {
        let len = (e - s + 1) as f64;
        let mut best = (0, f64::NEG_INFINITY);
        for b in s + 3..=e - 4 {
            let left: Vec<usize> = (s - 1..b).collect();
            let right: Vec<usize> = (b..e).collect();
            let w = (e - b) as f64 * (b - s + 1) as f64 / (len * len);
            let v = w * two_sample(dist, &left, &right).t;
            if v > best.1 {
                best = (b, v);
            }
        }
        best
    }

    /// `||S_k||^2` from the Gram matrix of the embedding anchored at `x0`.
    pub fn gram_cusum(
        rows: &[Vec<f64>],
        k: usize,
        x0: &[f64],
        s: &hdcp::metric::GroupingScheme,
    ) -> f64 {
        let n = rows.len();
        let g = |x: &[f64], y: &[f64]| hdcp::metric::gamma(x, y, s).unwrap();
        let kern =
            |i: usize, j: usize| 0.5 * (g(&rows[i], x0) + g(&rows[j], x0) - g(&rows[i], &rows[j]));
        let (mut ll, mut rr, mut lr) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                match (i < k, j < k) {
                    (true, true) => ll += kern(i, j),
                    (false, false) => rr += kern(i, j),
                    (true, false) => lr += kern(i, j),
                    _ => {}
                }
            }
        }
        let (kf, mf, nf) = (k as f64, (n - k) as f64, n as f64);
        let mean_diff_sq = ll / (kf * kf) + rr / (mf * mf) - 2.0 * lr / (kf * mf);
        kf * kf * mf * mf / nf.powi(3) * mean_diff_sq
    }

    pub fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
        let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => ss += 1.0,
                    (true, false) => sd += 1.0,
                    (false, true) => ds += 1.0,
                    (false, false) => dd += 1.0,
                }
            }
        }
        let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
        if denom == 0.0 {
            return 1.0;
        }
        2.0 * (ss * dd - sd * ds) / denom
    }
}
