//! Browser bindings: simulate a scenario, scan it, segment it, and sample the
//! null limit law. Every entry point returns a JSON string.

use hdcp::detect::{wbs_on_matrix, DetectConfig};
use hdcp::eval::{adjusted_rand_index, segmentation_labels, SchemeChoice};
use hdcp::limitdist::{sample_replicates, LimitMethod};
use hdcp::metric::pairwise_matrix;
use hdcp::scan::weighted_t_profile;
use hdcp::simgen::{generate, LabeledDataset, Scenario};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 400;
const MAX_P: usize = 2000;
const MAX_GRID: usize = 400;
const MAX_REPS: usize = 5000;
/// Coordinates shipped back for plotting.
const SHOWN_COORDS: usize = 3;

fn scheme_choice(name: &str) -> Result<SchemeChoice, String> {
    match name {
        "l1sqrt" => Ok(SchemeChoice::L1Sqrt),
        "euclid" => Ok(SchemeChoice::Euclidean),
        "chain-graph" => Ok(SchemeChoice::ChainGraph),
        "chain-dag" => Ok(SchemeChoice::ChainDag),
        other => Err(format!("unknown scheme \"{other}\"")),
    }
}

fn check_size(n: usize, p: usize) -> Result<(), String> {
    if n > MAX_N || p > MAX_P {
        return Err(format!("demo limits are n <= {MAX_N}, p <= {MAX_P}"));
    }
    Ok(())
}

fn simulate(scenario: &str, n: usize, p: usize, seed: u64) -> Result<LabeledDataset, String> {
    check_size(n, p)?;
    let sc: Scenario = scenario.parse().map_err(|e: hdcp::Error| e.to_string())?;
    generate(sc, n, p, seed).map_err(|e| e.to_string())
}

fn series(ds: &LabeledDataset) -> Vec<Vec<f64>> {
    let k = ds.data.p().min(SHOWN_COORDS);
    (0..k)
        .map(|j| (0..ds.data.n()).map(|t| ds.data.row(t)[j]).collect())
        .collect()
}

#[derive(Serialize)]
struct ProfileView {
    true_cps: Vec<usize>,
    series: Vec<Vec<f64>>,
    bs: Vec<usize>,
    values: Vec<f64>,
    best_b: usize,
}

pub fn scan_profile_json(
    scenario: &str,
    n: usize,
    p: usize,
    seed: u64,
    scheme: &str,
) -> Result<String, String> {
    let ds = simulate(scenario, n, p, seed)?;
    let scheme = scheme_choice(scheme)?.build(p).map_err(|e| e.to_string())?;
    let d = pairwise_matrix(&ds.data, &scheme).map_err(|e| e.to_string())?;
    let prof = weighted_t_profile(&d, 1, n).map_err(|e| e.to_string())?;
    let view = ProfileView {
        true_cps: ds.true_cps.clone(),
        series: series(&ds),
        bs: prof.bs,
        values: prof.values,
        best_b: prof.best_b,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SegmentView {
    true_cps: Vec<usize>,
    locations: Vec<usize>,
    ari: f64,
    series: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
pub fn segment_json(
    scenario: &str,
    n: usize,
    p: usize,
    seed: u64,
    scheme: &str,
    alpha: f64,
    perms: usize,
    intervals: usize,
) -> Result<String, String> {
    let ds = simulate(scenario, n, p, seed)?;
    let scheme = scheme_choice(scheme)?.build(p).map_err(|e| e.to_string())?;
    let d = pairwise_matrix(&ds.data, &scheme).map_err(|e| e.to_string())?;
    let config = DetectConfig::new(alpha, perms, intervals, seed).map_err(|e| e.to_string())?;
    let set = wbs_on_matrix(&d, &config).map_err(|e| e.to_string())?;
    let truth = segmentation_labels(&ds.true_cps, n).map_err(|e| e.to_string())?;
    let found = segmentation_labels(&set.locations, n).map_err(|e| e.to_string())?;
    let view = SegmentView {
        ari: adjusted_rand_index(&truth, &found).map_err(|e| e.to_string())?,
        true_cps: ds.true_cps.clone(),
        locations: set.locations,
        series: series(&ds),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct HistogramView {
    edges: Vec<f64>,
    counts: Vec<usize>,
    q90: f64,
    q95: f64,
    q99: f64,
}

pub fn limit_histogram_json(
    grid: usize,
    reps: usize,
    seed: u64,
    bins: usize,
) -> Result<String, String> {
    if grid > MAX_GRID || reps > MAX_REPS {
        return Err(format!(
            "demo limits are grid <= {MAX_GRID}, reps <= {MAX_REPS}"
        ));
    }
    if bins == 0 || reps == 0 {
        return Err("bins and reps must be positive".into());
    }
    let mut draws = sample_replicates(LimitMethod::PairArray { grid }, reps, seed)
        .map_err(|e| e.to_string())?;
    draws.sort_by(f64::total_cmp);
    let (lo, hi) = (draws[0], draws[reps - 1]);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0; bins];
    for x in &draws {
        counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let q = |prob: f64| draws[((prob * reps as f64).ceil() as usize).clamp(1, reps) - 1];
    let view = HistogramView {
        edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
        counts,
        q90: q(0.9),
        q95: q(0.95),
        q99: q(0.99),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn scan_profile(
    scenario: &str,
    n: usize,
    p: usize,
    seed: u64,
    scheme: &str,
) -> Result<String, JsError> {
    scan_profile_json(scenario, n, p, seed, scheme).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn segment(
    scenario: &str,
    n: usize,
    p: usize,
    seed: u64,
    scheme: &str,
    alpha: f64,
    perms: usize,
    intervals: usize,
) -> Result<String, JsError> {
    segment_json(scenario, n, p, seed, scheme, alpha, perms, intervals)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn limit_histogram(
    grid: usize,
    reps: usize,
    seed: u64,
    bins: usize,
) -> Result<String, JsError> {
    limit_histogram_json(grid, reps, seed, bins).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn profile_peaks_at_the_change() {
        let v: Value = serde_json::from_str(
            &scan_profile_json("mean_shift_iid", 60, 50, 1, "l1sqrt").unwrap(),
        )
        .unwrap();
        assert_eq!(v["true_cps"][0], 30);
        assert_eq!(v["best_b"], 30);
        assert_eq!(v["series"].as_array().unwrap().len(), 3);
        assert_eq!(
            v["bs"].as_array().unwrap().len(),
            v["values"].as_array().unwrap().len()
        );
    }

    #[test]
    fn segmentation_recovers_two_changes() {
        let v: Value = serde_json::from_str(
            &segment_json("two_cp_mean_iid", 90, 40, 2, "l1sqrt", 0.05, 99, 30).unwrap(),
        )
        .unwrap();
        let locs: Vec<u64> = v["locations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(locs.len(), 2);
        assert!(
            locs[0].abs_diff(30) <= 3 && locs[1].abs_diff(60) <= 3,
            "{locs:?}"
        );
        assert!(v["ari"].as_f64().unwrap() > 0.85);
    }

    #[test]
    fn histogram_counts_every_draw() {
        let v: Value =
            serde_json::from_str(&limit_histogram_json(40, 300, 3, 20).unwrap()).unwrap();
        let total: u64 = v["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .sum();
        assert_eq!(total, 300);
        assert_eq!(v["edges"].as_array().unwrap().len(), 21);
        assert!(v["q90"].as_f64().unwrap() <= v["q99"].as_f64().unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(scan_profile_json("nope", 60, 5, 1, "l1sqrt").is_err());
        assert!(scan_profile_json("mean_shift_iid", 60, 5, 1, "cosine").is_err());
        assert!(scan_profile_json("mean_shift_iid", 5000, 5, 1, "l1sqrt").is_err());
        assert!(segment_json("mean_shift_iid", 60, 5, 1, "l1sqrt", 2.0, 99, 10).is_err());
        assert!(limit_histogram_json(40, 10, 1, 0).is_err());
    }
}
