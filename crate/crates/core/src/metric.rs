//! Grouping schemes, the generalized Euclidean distance and the pairwise
//! distance matrix every downstream statistic reads from.
//!
//! For a collection of coordinate groups `S_1, ..., S_g` covering `{1..p}`
//! the distance is
//!
//! ```text
//! gamma(z, z') = sqrt( rho_1(z_S1, z'_S1) + ... + rho_g(z_Sg, z'_Sg) )
//! ```
//!
//! where each `rho_i` is the Euclidean distance on the subvector (absolute
//! difference for singleton groups). Groups may overlap.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of summands at and above which group sums use compensated accumulation.
pub const COMPENSATED_SUM_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    /// `||z - z'||_1^{1/2}`: one singleton group per coordinate.
    L1Sqrt,
    /// User-supplied groups, square root of the summed group distances.
    GroupedSqrt,
    /// Plain Euclidean distance `||z - z'||`, no square-root composition.
    EuclideanBaseline,
    /// One group per edge `{i, j}` of an undirected graph.
    GraphCliques,
    /// One group `{i} ∪ parents(i)` per node of a DAG.
    DagParents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMetric {
    Absolute,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    /// 0-based coordinate indices, in the order given by the caller.
    pub indices: Vec<usize>,
    pub base: BaseMetric,
}

impl Group {
    fn distance(&self, z: &[f64], w: &[f64]) -> f64 {
        match self.base {
            BaseMetric::Absolute => {
                let j = self.indices[0];
                (z[j] - w[j]).abs()
            }
            BaseMetric::Euclidean => {
                if self.indices.len() == 1 {
                    let j = self.indices[0];
                    return (z[j] - w[j]).abs();
                }
                self.indices
                    .iter()
                    .map(|&j| {
                        let diff = z[j] - w[j];
                        diff * diff
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }
}

/// Description of a scheme before validation, as read from the command line
/// or a structure file. All indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeSpec {
    L1Sqrt,
    Euclidean,
    Groups(Vec<Vec<usize>>),
    Graph(Vec<(usize, usize)>),
    /// `(node, parents)` pairs; nodes not listed have no parents.
    Dag(Vec<(usize, Vec<usize>)>),
}

impl SchemeSpec {
    /// Parses a grouping file: one group per line, comma-separated indices.
    pub fn parse_groups(text: &str) -> Result<Self> {
        let mut groups = Vec::new();
        for (lineno, line) in content_lines(text) {
            groups.push(parse_index_list(line, lineno)?);
        }
        Ok(SchemeSpec::Groups(groups))
    }

    /// Parses a graph file: one edge `i,j` per line.
    pub fn parse_graph(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in content_lines(text) {
            let idx = parse_index_list(line, lineno)?;
            if idx.len() != 2 {
                return Err(Error::Scheme(format!(
                    "line {lineno}: expected an edge \"i,j\", got {} indices",
                    idx.len()
                )));
            }
            edges.push((idx[0], idx[1]));
        }
        Ok(SchemeSpec::Graph(edges))
    }

    /// Parses a DAG file: lines `i: p1,p2,...` (the parent list may be empty).
    pub fn parse_dag(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (lineno, line) in content_lines(text) {
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| Error::Scheme(format!("line {lineno}: expected \"i: parents\"")))?;
            let node = parse_index(head.trim(), lineno)?;
            let parents = if tail.trim().is_empty() {
                Vec::new()
            } else {
                parse_index_list(tail, lineno)?
            };
            nodes.push((node, parents));
        }
        Ok(SchemeSpec::Dag(nodes))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_index(tok: &str, lineno: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Scheme(format!("line {lineno}: \"{tok}\" is not a positive index")))
}

fn parse_index_list(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split(',')
        .map(|t| parse_index(t.trim(), lineno))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingScheme {
    mode: SchemeMode,
    p: usize,
    groups: Vec<Group>,
}

impl GroupingScheme {
    pub fn l1_sqrt(p: usize) -> Result<Self> {
        build_scheme(&SchemeSpec::L1Sqrt, p)
    }

    pub fn euclidean(p: usize) -> Result<Self> {
        build_scheme(&SchemeSpec::Euclidean, p)
    }

    /// Edge groups `{i, i+1}` of the path graph on `p` nodes.
    pub fn chain_graph(p: usize) -> Result<Self> {
        let edges = (1..p).map(|i| (i, i + 1)).collect();
        build_scheme(&SchemeSpec::Graph(edges), p)
    }

    /// Parent groups of the directed chain `1 -> 2 -> ... -> p`.
    pub fn chain_dag(p: usize) -> Result<Self> {
        let nodes = (1..=p)
            .map(|i| (i, if i == 1 { vec![] } else { vec![i - 1] }))
            .collect();
        build_scheme(&SchemeSpec::Dag(nodes), p)
    }

    pub fn mode(&self) -> SchemeMode {
        self.mode
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Groups as 1-based index lists.
    pub fn groups_one_based(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| g.indices.iter().map(|i| i + 1).collect())
            .collect()
    }
}

/// Validates a scheme description against the dimension `p`.
pub fn build_scheme(spec: &SchemeSpec, p: usize) -> Result<GroupingScheme> {
    if p == 0 {
        return Err(Error::Scheme("dimension must be at least 1".into()));
    }
    let singletons = || {
        (0..p)
            .map(|j| Group {
                indices: vec![j],
                base: BaseMetric::Absolute,
            })
            .collect::<Vec<_>>()
    };
    let (mode, raw): (SchemeMode, Vec<Vec<usize>>) = match spec {
        SchemeSpec::L1Sqrt => {
            return Ok(GroupingScheme {
                mode: SchemeMode::L1Sqrt,
                p,
                groups: singletons(),
            })
        }
        SchemeSpec::Euclidean => {
            return Ok(GroupingScheme {
                mode: SchemeMode::EuclideanBaseline,
                p,
                groups: vec![Group {
                    indices: (0..p).collect(),
                    base: BaseMetric::Euclidean,
                }],
            })
        }
        SchemeSpec::Groups(groups) => (SchemeMode::GroupedSqrt, groups.clone()),
        SchemeSpec::Graph(edges) => {
            for &(i, j) in edges {
                if i == j {
                    return Err(Error::Scheme(format!("self-loop at node {i}")));
                }
            }
            (
                SchemeMode::GraphCliques,
                edges.iter().map(|&(i, j)| vec![i, j]).collect(),
            )
        }
        SchemeSpec::Dag(nodes) => (SchemeMode::DagParents, dag_groups(nodes, p)?),
    };

    let mut covered = vec![false; p];
    let mut groups = Vec::with_capacity(raw.len());
    for (gi, g) in raw.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::Scheme(format!("group {} is empty", gi + 1)));
        }
        let mut indices = Vec::with_capacity(g.len());
        for &idx in g {
            if idx == 0 || idx > p {
                return Err(Error::Scheme(format!(
                    "index {idx} in group {} is outside 1..={p}",
                    gi + 1
                )));
            }
            covered[idx - 1] = true;
            indices.push(idx - 1);
        }
        let base = if indices.len() == 1 {
            BaseMetric::Absolute
        } else {
            BaseMetric::Euclidean
        };
        groups.push(Group { indices, base });
    }
    if let Some(j) = covered.iter().position(|c| !c) {
        return Err(Error::Scheme(format!(
            "coordinate {} is not covered by any group",
            j + 1
        )));
    }
    Ok(GroupingScheme { mode, p, groups })
}

fn dag_groups(nodes: &[(usize, Vec<usize>)], p: usize) -> Result<Vec<Vec<usize>>> {
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; p];
    for (node, pa) in nodes {
        let node = *node;
        if node == 0 || node > p {
            return Err(Error::Scheme(format!("node {node} is outside 1..={p}")));
        }
        if parents[node - 1].is_some() {
            return Err(Error::Scheme(format!("node {node} is listed twice")));
        }
        for &q in pa {
            if q == 0 || q > p {
                return Err(Error::Scheme(format!(
                    "parent {q} of node {node} is outside 1..={p}"
                )));
            }
        }
        parents[node - 1] = Some(pa.clone());
    }
    let parents: Vec<Vec<usize>> = parents.into_iter().map(Option::unwrap_or_default).collect();
    check_acyclic(&parents)?;
    Ok(parents
        .iter()
        .enumerate()
        .map(|(i, pa)| {
            let set: BTreeSet<usize> = pa.iter().copied().chain([i + 1]).collect();
            set.into_iter().collect()
        })
        .collect())
}

/// Kahn's algorithm over 1-based parent lists.
fn check_acyclic(parents: &[Vec<usize>]) -> Result<()> {
    let p = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); p];
    for (i, pa) in parents.iter().enumerate() {
        for &q in pa {
            children[q - 1].push(i);
        }
    }
    let mut ready: Vec<usize> = (0..p).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if seen != p {
        return Err(Error::Scheme("parent structure contains a cycle".into()));
    }
    Ok(())
}

/// Time-ordered observations, row `t` is `X_{t+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Data(format!("empty data matrix ({n}x{p})")));
        }
        if values.len() != n * p {
            return Err(Error::Data(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                k / p + 1,
                k % p + 1
            )));
        }
        Ok(DataMatrix { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Data(format!(
                "row {} has {} columns, expected {p}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// 0-based row access.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.p..(t + 1) * self.p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn accumulate(values: impl Iterator<Item = f64>, compensated: bool) -> f64 {
    if compensated {
        compensated_sum(values)
    } else {
        values.sum()
    }
}

/// Generalized Euclidean distance between two observations.
pub fn gamma(z: &[f64], w: &[f64], scheme: &GroupingScheme) -> Result<f64> {
    if z.len() != scheme.p || w.len() != scheme.p {
        return Err(Error::Data(format!(
            "vector lengths {} and {} do not match scheme dimension {}",
            z.len(),
            w.len(),
            scheme.p
        )));
    }
    if z.iter().chain(w).any(|v| !v.is_finite()) {
        return Err(Error::Data(
            "non-finite coordinate in distance input".into(),
        ));
    }
    Ok(gamma_unchecked(z, w, scheme))
}

pub(crate) fn gamma_unchecked(z: &[f64], w: &[f64], scheme: &GroupingScheme) -> f64 {
    let compensated = scheme.groups.len() >= COMPENSATED_SUM_THRESHOLD
        || (scheme.mode == SchemeMode::EuclideanBaseline && scheme.p >= COMPENSATED_SUM_THRESHOLD);
    match scheme.mode {
        SchemeMode::EuclideanBaseline => {
            accumulate(z.iter().zip(w).map(|(a, b)| (a - b) * (a - b)), compensated).sqrt()
        }
        SchemeMode::L1Sqrt => {
            accumulate(z.iter().zip(w).map(|(a, b)| (a - b).abs()), compensated).sqrt()
        }
        _ => accumulate(scheme.groups.iter().map(|g| g.distance(z, w)), compensated).sqrt(),
    }
}

/// Symmetric `n x n` matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a precomputed row-major matrix after checking symmetry, the zero
    /// diagonal and non-negativity.
    pub fn from_raw(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::Data(format!(
                "distance matrix of order {n} needs {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::Data(format!("nonzero diagonal at {}", i + 1)));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 || v != d[j * n + i] {
                    return Err(Error::Data(format!(
                        "entry ({}, {}) is not a symmetric nonnegative distance",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }
}

/// Computes `gamma(X_i, X_j)` for every pair of rows.
pub fn pairwise_matrix(data: &DataMatrix, scheme: &GroupingScheme) -> Result<DistanceMatrix> {
    if scheme.p != data.p {
        return Err(Error::Data(format!(
            "scheme dimension {} does not match data dimension {}",
            scheme.p, data.p
        )));
    }
    let n = data.n;
    let upper_row = |i: usize| -> Vec<f64> {
        let xi = data.row(i);
        (i + 1..n)
            .map(|j| gamma_unchecked(xi, data.row(j), scheme))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let upper: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(upper_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let upper: Vec<Vec<f64>> = (0..n).map(upper_row).collect();

    let mut d = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { n, d })
}
