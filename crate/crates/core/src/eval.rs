//! Adjusted Rand Index scoring of segmentations and the batch experiment
//! harness.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detect::{single_test_on_matrix, wbs_on_matrix, DetectConfig};
use crate::error::{Error, Result};
use crate::metric::{pairwise_matrix, GroupingScheme};
use crate::rng::{self, derive_seed};
use crate::simgen::{generate, Scenario};

/// Segment label of every time point given sorted change-points.
pub fn segmentation_labels(cps: &[usize], n: usize) -> Result<Vec<usize>> {
    if cps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Data(
            "change-points must be strictly increasing".into(),
        ));
    }
    if let Some(&c) = cps.iter().find(|&&c| c == 0 || c >= n) {
        return Err(Error::Data(format!(
            "change-point {c} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    let mut labels = Vec::with_capacity(n);
    let mut seg = 0;
    for t in 1..=n {
        labels.push(seg);
        if cps.get(seg) == Some(&t) {
            seg += 1;
        }
    }
    Ok(labels)
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Hubert-Arabie adjusted Rand index. Two single-cluster labelings score 1;
/// exactly one single-cluster labeling scores 0.
pub fn adjusted_rand_index<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Eq + std::hash::Hash,
    B: Eq + std::hash::Hash,
{
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "labelings have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::TooSmall {
            what: "adjusted Rand index",
            min: 2,
            got: a.len(),
        });
    }
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    match (rows.len() == 1, cols.len() == 1) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len() as u64);
    let expected = sum_rows * sum_cols / total;
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        // Only when both labelings put every point in its own cluster.
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorMethod {
    Single,
    Wbs,
}

/// Scheme families that can be instantiated for any dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    L1Sqrt,
    Euclidean,
    /// Edge groups of the path graph `1 - 2 - ... - p`.
    ChainGraph,
    /// Parent groups of the directed chain `1 -> 2 -> ... -> p`.
    ChainDag,
}

impl SchemeChoice {
    pub fn build(self, p: usize) -> Result<GroupingScheme> {
        match self {
            SchemeChoice::L1Sqrt => GroupingScheme::l1_sqrt(p),
            SchemeChoice::Euclidean => GroupingScheme::euclidean(p),
            SchemeChoice::ChainGraph => GroupingScheme::chain_graph(p),
            SchemeChoice::ChainDag => GroupingScheme::chain_dag(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: DetectorMethod,
    pub scheme: SchemeChoice,
    pub alpha: f64,
    pub permutations: usize,
    pub intervals: usize,
}

impl DetectorConfig {
    pub fn single(scheme: SchemeChoice) -> Self {
        DetectorConfig {
            method: DetectorMethod::Single,
            scheme,
            alpha: crate::detect::DEFAULT_ALPHA,
            permutations: crate::detect::DEFAULT_PERMUTATIONS,
            intervals: crate::detect::DEFAULT_INTERVALS,
        }
    }

    pub fn wbs(scheme: SchemeChoice) -> Self {
        DetectorConfig {
            method: DetectorMethod::Wbs,
            ..Self::single(scheme)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub data_seed: u64,
    pub detect_seed: u64,
    pub true_cps: Vec<usize>,
    pub locations: Vec<usize>,
    pub ari: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub detector: DetectorConfig,
    pub mean_ari: f64,
    pub sd_ari: f64,
    /// Fraction of replicates reporting at least one change-point.
    pub detection_rate: f64,
    pub records: Vec<RepRecord>,
}

fn run_rep(
    scenario: Scenario,
    n: usize,
    p: usize,
    detector: &DetectorConfig,
    seed: u64,
    rep: usize,
) -> Result<RepRecord> {
    let start = Instant::now();
    let data_seed = derive_seed(seed, rng::DOMAIN_EXPERIMENT_DATA, rep as u64);
    let detect_seed = derive_seed(seed, rng::DOMAIN_EXPERIMENT_DETECT, rep as u64);
    let ds = generate(scenario, n, p, data_seed)?;
    let scheme = detector.scheme.build(p)?;
    let d = pairwise_matrix(&ds.data, &scheme)?;
    let config = DetectConfig::new(
        detector.alpha,
        detector.permutations,
        detector.intervals,
        detect_seed,
    )?;
    let locations = match detector.method {
        DetectorMethod::Single => {
            let r = single_test_on_matrix(&d, &config)?;
            if r.rejected {
                vec![r.tau_hat]
            } else {
                vec![]
            }
        }
        DetectorMethod::Wbs => wbs_on_matrix(&d, &config)?.locations,
    };
    let ari = adjusted_rand_index(
        &segmentation_labels(&ds.true_cps, n)?,
        &segmentation_labels(&locations, n)?,
    )?;
    Ok(RepRecord {
        rep,
        data_seed,
        detect_seed,
        true_cps: ds.true_cps,
        locations,
        ari,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Generates, detects and scores `reps` seeded replicates.
pub fn run_experiment(
    scenario: Scenario,
    n: usize,
    p: usize,
    detector: &DetectorConfig,
    reps: usize,
    seed: u64,
) -> Result<ExperimentSummary> {
    if reps == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    // Replicates run in sequence; the permutation loop inside each is parallel.
    let records = (0..reps)
        .map(|rep| run_rep(scenario, n, p, detector, seed, rep))
        .collect::<Result<Vec<_>>>()?;
    let aris: Vec<f64> = records.iter().map(|r| r.ari).collect();
    let mean = aris.iter().sum::<f64>() / reps as f64;
    let sd = if reps > 1 {
        (aris.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
    } else {
        0.0
    };
    let detections = records.iter().filter(|r| !r.locations.is_empty()).count();
    Ok(ExperimentSummary {
        scenario,
        n,
        p,
        reps,
        seed,
        detector: *detector,
        mean_ari: mean,
        sd_ari: sd,
        detection_rate: detections as f64 / reps as f64,
        records,
    })
}

impl ExperimentSummary {
    /// One CSV row per replicate; locations are `;`-separated.
    pub fn records_csv(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        let mut out =
            String::from("rep,data_seed,detect_seed,true_cps,locations,ari,runtime_seconds\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.rep,
                r.data_seed,
                r.detect_seed,
                join(&r.true_cps),
                join(&r.locations),
                r.ari,
                r.runtime_seconds
            ));
        }
        out
    }
}
