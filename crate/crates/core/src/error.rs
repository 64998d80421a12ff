use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizeError {
    #[error("no valid approximator: {0}")]
    NoApproximator(&'static str),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column} (field `{path}`): {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {message}")]
    Semantic { location: String, message: String },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid problem: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidProblem(Vec<Violation>),
    #[error("LP relaxation infeasible in round {round}")]
    Infeasible { round: usize },
    #[error("LP relaxation unbounded in round {round}")]
    Unbounded { round: usize },
    #[error("LP iteration limit reached in round {round}")]
    IterationLimit { round: usize },
    #[error("branching requires binary integer variables only")]
    NonBinaryInteger,
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("negative value {0} in shifted geometric mean")]
    Negative(f64),
    #[error("shift must be positive, got {0}")]
    BadShift(f64),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
