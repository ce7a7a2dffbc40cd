use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension N = {0} (quadrature supports N in 2..=4)")]
    UnsupportedDimension(usize),

    #[error("optimizer budget exhausted after {evals} evaluations; best bracket [{lo}, {hi}]")]
    BudgetExhausted { lo: f64, hi: f64, evals: usize },

    #[error("supremum did not stabilize under refinement; diverging bracket [{lo}, {hi}]")]
    UnstableSupremum { lo: f64, hi: f64 },

    #[error("quadrature did not converge by level {level}: last two values {previous} and {last}")]
    NonConvergence { level: u32, previous: f64, last: f64 },

    #[error("non-finite integrand value at node {index} ({point:?})")]
    NonFiniteIntegrand { index: usize, point: Vec<f64> },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("inconsistent quantities: {0}")]
    Inconsistency(String),

    #[error("all trial functions were degenerate")]
    DegenerateTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
