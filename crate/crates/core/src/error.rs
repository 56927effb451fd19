//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by panel construction, centering, estimation, and the
/// bias-correction layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate cell: individual {indiv} observed twice at period {time}")]
    DuplicateCell { indiv: String, time: i64 },

    #[error("ragged regressors: row {row} has {got} values, expected {expected}")]
    RaggedRegressors {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("regressor `{name}` is declared binary but contains value {value}")]
    NonBinaryRegressor { name: String, value: f64 },

    #[error("panel is empty after validation/pruning")]
    EmptyPanel,

    #[error("sub-panel selector produced no observations")]
    EmptySubpanel,

    #[error("non-finite linear predictor")]
    NonFiniteEta,

    #[error("degenerate working weight at eta = {eta}")]
    DegenerateWeight { eta: f64 },

    #[error("zero weight sum in {factor} group {group}")]
    ZeroGroupWeight { factor: &'static str, group: usize },

    #[error("{what} did not converge within {limit} iterations")]
    NoConvergence { what: &'static str, limit: usize },

    #[error("centered regressors are rank deficient (pivot {pivot:.3e} at column {col})")]
    Collinear { col: usize, pivot: f64 },

    #[error("bandwidth {l} too large: shortest individual span is {min_span}")]
    BandwidthTooLarge { l: usize, min_span: usize },

    #[error("sub-panel fit failed ({which}): {source}")]
    SubpanelFitFailed {
        which: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown table id {0}")]
    UnknownTable(u32),

    #[error("{0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
