use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e} after {subdivisions} subdivisions)")]
    Quadrature {
        requested: f64,
        achieved: f64,
        subdivisions: usize,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("branching population exceeded cap of {cap} individuals")]
    PopulationCap { cap: u64 },

    #[error("resample budget of {budget} busy periods exhausted: {what}")]
    ResampleBudget { budget: usize, what: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
