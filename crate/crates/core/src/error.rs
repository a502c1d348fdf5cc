use std::path::PathBuf;

use thiserror::Error;

use crate::formulation::FeasibilityReport;
use crate::instance::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid instance: {0}")]
    Validation(ValidationReport),

    #[error("infeasible solution: {0}")]
    InfeasibleSolution(FeasibilityReport),

    #[error("solution does not match instance: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "instance has {zones} zones and {sites} sites, beyond the exact solver limits \
         ({max_zones} zones, {max_sites} sites); use heuristic mode instead"
    )]
    ExceedsCaps {
        zones: usize,
        sites: usize,
        max_zones: usize,
        max_sites: usize,
    },

    #[error("instance too large for exhaustive enumeration ({0} combinations)")]
    TooLargeForOracle(u128),

    #[error("reduced model infeasible: {0}")]
    ReducedInfeasible(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
