use thiserror::Error;

use crate::metric::Norm;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },
    #[error("invalid distance matrix: {0}")]
    InvalidMetric(String),
    #[error("norm {0} is not supported by this operation")]
    UnsupportedNorm(Norm),
    #[error("clouds do not share an ambient space: {0}")]
    AmbientMismatch(String),
    #[error("need simplices of dimension max_degree+1 (max_degree {max_degree}, complex max_dim {max_dim})")]
    DegreeTooHigh { max_degree: usize, max_dim: usize },
    #[error("complex has {count} simplices, brute force is capped at {cap}")]
    TooManySimplices { count: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid core: {0}")]
    InvalidCore(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("prerequisite failed for {theorem}: {reason}")]
    Prerequisite { theorem: String, reason: String },
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
