//! JSON report schema. Volatile quantities (wall time) are deliberately kept
//! out of the report body so that identical runs produce identical bytes;
//! timings go to stderr.

use serde::Serialize;
use twofe::panel::DropLog;

pub const SCHEMA_VERSION: u32 = 1;

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    /// Echo of the run specification as given.
    pub spec: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Estimate {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
}

#[derive(Debug, Serialize)]
pub struct CorrectionBlock {
    pub label: String,
    pub coefficients: Vec<Estimate>,
    pub apes: Vec<Estimate>,
    pub bias_hat: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subpanel_betas: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub metadata: Metadata,
    pub family: String,
    pub covariance: &'static str,
    pub n_obs_input: usize,
    pub n_obs_used: usize,
    pub n_indiv: usize,
    pub n_time: usize,
    pub dropped: DropLog,
    pub loglik: f64,
    pub iterations: usize,
    pub coefficients: Vec<Estimate>,
    pub apes: Vec<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_of_unit_fraction: Option<f64>,
    pub corrections: Vec<CorrectionBlock>,
}
