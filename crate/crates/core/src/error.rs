use thiserror::Error;

use crate::spin::Spin;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every sector weight fell below the truncation threshold {eps:e}")]
    EmptyTable { eps: f64 },

    #[error("sector I={spin} is not a state: eigenvalue {eigenvalue:e} < -{tol:e}")]
    NotAState { spin: Spin, eigenvalue: f64, tol: f64 },

    #[error("no gaussian decay: 1/tau^2 = {inv_tau_sq:e} is not positive")]
    NoGaussianDecay { inv_tau_sq: f64 },

    #[error("singular evolution matrix at t={time}: |det M| = {det:e}")]
    SingularEvolution { time: f64, det: f64 },

    #[error("{what} exceeds the configured cap ({value} > {cap})")]
    ResourceLimit { what: &'static str, value: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
