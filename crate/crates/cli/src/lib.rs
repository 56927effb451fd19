//! Command-line front end: CSV ingestion, model fitting with chosen
//! corrections, Monte Carlo replication of the simulation tables, and
//! machine-readable reports.

pub mod csv_io;
pub mod report;
pub mod run;
pub mod tables;

use std::fmt;

/// CLI-level errors carrying the process exit code: 2 usage, 3 data,
/// 4 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<twofe::Error> for CliError {
    fn from(e: twofe::Error) -> Self {
        use twofe::Error::*;
        match e {
            DuplicateCell { .. }
            | RaggedRegressors { .. }
            | NonBinaryRegressor { .. }
            | EmptyPanel
            | EmptySubpanel
            | Data(_) => CliError::Data(e.to_string()),
            UnknownTable(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Run a closure inside a rayon pool of the requested size; `None` keeps the
/// global pool (which itself honors `RAYON_NUM_THREADS`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
