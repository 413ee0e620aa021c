//! JSON reports for detection runs and CSV export of scan profiles.

use serde::{Deserialize, Serialize};

use crate::detect::{Calibration, ChangePoint, ChangePointSet, DetectConfig, SingleResult};
use crate::error::Result;
use crate::scan::ScanProfile;
use crate::simgen::{LabeledDataset, Scenario, ScenarioParams};

/// Run settings echoed at the top of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub command: String,
    pub input: Option<String>,
    pub scheme: String,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub permutations: usize,
    pub intervals: usize,
    pub seed: u64,
    pub min_segment: usize,
    pub calibration: Calibration,
}

impl ReportConfig {
    pub fn new(
        command: &str,
        input: Option<String>,
        scheme: &str,
        n: usize,
        p: usize,
        config: &DetectConfig,
        calibration: Calibration,
    ) -> Self {
        ReportConfig {
            command: command.to_string(),
            input,
            scheme: scheme.to_string(),
            n,
            p,
            alpha: config.alpha,
            permutations: config.permutations,
            intervals: config.intervals,
            seed: config.seed,
            min_segment: config.min_segment,
            calibration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WbsReport {
    pub config: ReportConfig,
    pub locations: Vec<usize>,
    pub details: Vec<ChangePoint>,
    /// Wall-clock time; `None` unless timing was requested, which keeps
    /// repeated runs byte-identical.
    pub runtime_seconds: Option<f64>,
}

impl WbsReport {
    pub fn new(config: ReportConfig, set: ChangePointSet, runtime_seconds: Option<f64>) -> Self {
        WbsReport {
            config,
            locations: set.locations,
            details: set.details,
            runtime_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub config: ReportConfig,
    /// `[tau_hat]` when rejected, else empty.
    pub locations: Vec<usize>,
    pub details: Vec<ChangePoint>,
    pub tau_hat: usize,
    pub new_regime_start: usize,
    pub m_n: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub rejected: bool,
    pub runtime_seconds: Option<f64>,
}

impl SingleReport {
    pub fn new(config: ReportConfig, result: &SingleResult, runtime_seconds: Option<f64>) -> Self {
        let n = config.n;
        let details = if result.rejected {
            vec![ChangePoint {
                tau: result.tau_hat,
                new_regime_start: result.tau_hat + 1,
                segment: (1, n),
                interval: (1, n),
                statistic: result.m_n,
                threshold: result.threshold,
                p_value: result.p_value,
                generation: 0,
            }]
        } else {
            vec![]
        };
        SingleReport {
            config,
            locations: details.iter().map(|c| c.tau).collect(),
            details,
            tau_hat: result.tau_hat,
            new_regime_start: result.tau_hat + 1,
            m_n: result.m_n,
            threshold: result.threshold,
            p_value: result.p_value,
            rejected: result.rejected,
            runtime_seconds,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub const PROFILE_HEADER: &str = "s,e,b,weight,t,weighted_t";

/// Rows `s,e,b,weight,t,weighted_t`, without header.
pub fn profile_rows(profile: &ScanProfile) -> String {
    let mut out = String::new();
    for i in 0..profile.bs.len() {
        out.push_str(&format!(
            "{},{},{},{:?},{:?},{:?}\n",
            profile.s,
            profile.e,
            profile.bs[i],
            profile.weights[i],
            profile.t[i],
            profile.values[i]
        ));
    }
    out
}

pub fn profiles_csv(profiles: &[ScanProfile]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for p in profiles {
        out.push_str(&profile_rows(p));
    }
    out
}

/// JSON sidecar written next to a simulated data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub scenario: Scenario,
    pub true_cps: Vec<usize>,
    pub params: ScenarioParams,
    pub seed: u64,
    pub data_file: String,
}

impl DatasetSidecar {
    pub fn new(ds: &LabeledDataset, data_file: &str) -> Self {
        DatasetSidecar {
            scenario: ds.scenario,
            true_cps: ds.true_cps.clone(),
            params: ds.params.clone(),
            seed: ds.params.seed,
            data_file: data_file.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ReportConfig {
        ReportConfig::new(
            "detect-wbs",
            None,
            "l1sqrt",
            20,
            3,
            &DetectConfig::default(),
            Calibration::Permutation,
        )
    }

    #[test]
    fn empty_set_has_empty_locations() {
        let set = ChangePointSet {
            locations: vec![],
            details: vec![],
            config: DetectConfig::default(),
        };
        let json = to_json(&WbsReport::new(cfg(), set, None)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["locations"], serde_json::json!([]));
        assert!(v["runtime_seconds"].is_null());
    }

    #[test]
    fn single_report_fields() {
        let r = SingleResult {
            tau_hat: 10,
            m_n: 3.25,
            threshold: 1.5,
            p_value: Some(0.005),
            rejected: true,
            permutations: 199,
            alpha: 0.05,
            calibration: Calibration::Permutation,
        };
        let rep = SingleReport::new(cfg(), &r, Some(0.5));
        let v: serde_json::Value = serde_json::from_str(&to_json(&rep).unwrap()).unwrap();
        for key in [
            "tau_hat",
            "m_n",
            "threshold",
            "p_value",
            "rejected",
            "new_regime_start",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["details"][0]["segment"], serde_json::json!([1, 20]));
        assert_eq!(v["locations"], serde_json::json!([10]));
        assert_eq!(v["new_regime_start"], 11);
    }
}
