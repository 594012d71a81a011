//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Failure to read or parse a scenario directory.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required file")]
    MissingFile { path: PathBuf },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{file} row {row}: {message}")]
    BadRecord {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{file}: {message}")]
    BadTable { file: String, message: String },
}

/// `shaev_split` rejects fractions outside the unit interval.
#[derive(Debug, Error)]
pub enum SplitError {
    #[error("shared fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),
}

/// Cost-coefficient evaluation failures.
#[derive(Debug, Error)]
pub enum CostError {
    #[error("amortisation of capital {capital} at rate {rate} over {lifetime} days is not finite")]
    NonFinite {
        capital: f64,
        rate: f64,
        lifetime: f64,
    },
    #[error("invalid amortisation input: {0}")]
    BadInput(String),
}

/// Program-assembly failures: the scenario tables disagree with the
/// dimension sets.
#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("table {table}: expected {expected} entries for {subscript}, found {found}")]
    DimensionMismatch {
        table: &'static str,
        subscript: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("duplicate coefficient at row {row}, column {col}")]
    DuplicateEntry { row: usize, col: usize },
    #[error("cost coefficient failure: {0}")]
    Cost(#[from] CostError),
}

/// Solver interface errors. Solve outcomes (infeasible, iteration limit,
/// numerical failure) are reported as statuses on the solution, not errors.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("program has no variables")]
    EmptyProgram,
    #[error("program was not finalized before solve")]
    NotFinalized,
    #[error("solution/point length {found} does not match column count {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Enumeration-oracle errors.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("scenario exceeds tiny-instance bounds: {0}")]
    NotTiny(String),
    #[error("discretised search space of {points:.3e} points exceeds budget {budget:.3e}")]
    BudgetExceeded { points: f64, budget: f64 },
    #[error("no feasible point on the discretisation grid")]
    NoFeasiblePoint,
}
