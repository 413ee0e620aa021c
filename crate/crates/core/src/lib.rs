//! Change-point detection for sequences of high-dimensional observations.
//!
//! Distances between observations come from a grouping scheme ([`metric`]).
//! A studentized energy two-sample statistic ([`two_sample`]) is scanned over
//! candidate splits ([`scan`]) and calibrated by permutation, either once
//! ([`detect::single_changepoint_test`]) or recursively over random intervals
//! ([`detect::wbs_detect`]). [`limitdist`] simulates the limiting null law of
//! the scan maximum. [`simgen`] and [`eval`] provide labeled synthetic data and
//! adjusted Rand index scoring.
//!
//! Time indices in the public API are 1-based and inclusive; a change-point
//! `tau` is the last index of the old regime.
//!
//! ```
//! use hdcp::{generate, pairwise_matrix, GroupingScheme, Scenario};
//! use hdcp::detect::{wbs_on_matrix, DetectConfig};
//!
//! let ds = generate(Scenario::TwoCpMeanIid, 100, 100, 1)?;
//! let d = pairwise_matrix(&ds.data, &GroupingScheme::l1_sqrt(100)?)?;
//! let found = wbs_on_matrix(&d, &DetectConfig::new(0.05, 199, 50, 7)?)?;
//! assert_eq!(found.locations, ds.true_cps);
//! # Ok::<(), hdcp::Error>(())
//! ```

pub mod detect;
pub mod error;
pub mod eval;
pub mod io;
mod kernel;
pub mod limitdist;
pub mod metric;
mod par;
pub mod report;
pub mod rng;
pub mod scan;
pub mod simgen;
pub mod two_sample;

pub use detect::{
    single_changepoint_test, wbs_detect, ChangePoint, ChangePointSet, DetectConfig, SingleResult,
};
pub use error::{Error, Result};
pub use eval::{adjusted_rand_index, run_experiment, segmentation_labels};
pub use limitdist::{estimate_quantiles, LimitMethod, QuantileTable};
pub use metric::{
    build_scheme, gamma, pairwise_matrix, DataMatrix, DistanceMatrix, GroupingScheme, SchemeSpec,
};
pub use scan::{scan_max, weighted_t_profile, ScanProfile};
pub use simgen::{generate, LabeledDataset, Scenario};
pub use two_sample::{t_statistic, TwoSampleResult};
