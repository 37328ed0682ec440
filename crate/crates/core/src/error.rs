use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("consumption utility undefined at c = {0} (requires c > 0)")]
    Domain(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("alternative {choice} is infeasible: consumption {consumption} <= 0")]
    Infeasible { choice: String, consumption: f64 },

    #[error("no feasible alternative: best budget residual {best_residual} <= 0 (resources {resources}, medical cost {medical_cost})")]
    NoFeasibleAlternative {
        best_residual: f64,
        resources: f64,
        medical_cost: f64,
    },

    #[error("empty feasible set at state {state}")]
    EmptyFeasibleSet { state: String },

    #[error("quadrature did not converge on [{lo}, {hi}]: residual {residual:e}")]
    Quadrature { lo: f64, hi: f64, residual: f64 },

    #[error("state off grid: {0}")]
    OffGrid(String),

    #[error(
        "fixed-effect demeaning did not converge after {sweeps} sweeps (max change {max_change:e})"
    )]
    DemeanNotConverged { sweeps: usize, max_change: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("moderator `{column}` varies within id {id}; average it within individual first (ModeratorSource::IdMean)")]
    TimeVaryingModerator { column: String, id: u64 },

    #[error("weak first stage: |{first_stage}| < {tolerance}")]
    WeakFirstStage { first_stage: f64, tolerance: f64 },

    #[error("schema violation at row {row}, column `{column}`: {reason}")]
    Schema {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("replicate {replicate} (seed {seed}) failed: {source}")]
    Replicate {
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (config, schema, parameters) rather
    /// than failures during computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Schema { .. }
                | Error::Config { .. }
                | Error::TimeVaryingModerator { .. }
        )
    }
}
