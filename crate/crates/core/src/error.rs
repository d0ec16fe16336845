use thiserror::Error;

use crate::lp::LpSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution {got} is below the minimum of {min}")]
    ResolutionTooLow { got: usize, min: usize },

    #[error("field has no harmonic coefficients; analyze it first")]
    NotAnalyzed,

    #[error("band limit {l_max} needs a grid with L >= {needed}, got L = {got}")]
    BandLimitExceeded { l_max: usize, needed: usize, got: usize },

    #[error("right-hand side is not orthogonal to the degree-1 harmonics: defect = {defect:?}, tol = {tol:e}")]
    OrthogonalityViolation { defect: [f64; 3], tol: f64 },

    #[error("kernel evaluated at a singular configuration: {0}")]
    SingularEvaluation(String),

    #[error("invalid dimension n = {0}")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is not strictly positive (min value {min:e} at node {node})")]
    NotPositive { min: f64, node: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<LpSolution>,
    },

    #[error("iterate lost positivity at iteration {iteration} (min value {min:e})")]
    PositivityLost { iteration: usize, min: f64 },

    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    #[error("input does not match the grid: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, used in report documents.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ResolutionTooLow { .. } => "ResolutionTooLow",
            Error::NotAnalyzed => "NotAnalyzed",
            Error::BandLimitExceeded { .. } => "BandLimitExceeded",
            Error::OrthogonalityViolation { .. } => "OrthogonalityViolation",
            Error::SingularEvaluation(_) => "SingularEvaluation",
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NotPositive { .. } => "NotPositive",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::PositivityLost { .. } => "PositivityLost",
            Error::ParseError { .. } => "ParseError",
            Error::GridMismatch(_) => "GridMismatch",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
