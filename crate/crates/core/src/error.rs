use thiserror::Error;

use crate::fisher::OptimalType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("operation is not defined for {0} measurements")]
    UnsupportedKind(&'static str),

    #[error("outcome covariance is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("numerical failure: {0}")]
    NumericFailure(String),

    #[error("{0:?} measurement is undefined for r = 0")]
    UndefinedType(OptimalType),

    #[error("no real optimal seed squeezing exists (|alpha~|^2 = {alpha_tilde_sq:.6}, limit {limit:.6})")]
    NoRealSOpt { alpha_tilde_sq: f64, limit: f64 },

    #[error("no real optimal angle exists (cos chi = {0:.6})")]
    NoRealAngle(f64),

    #[error("state does not satisfy the canonical phase relation theta_c = (pi + theta_s)/2")]
    NonCanonical,

    #[error("required Fock cutoff exceeds the maximum of {max}")]
    CutoffExceeded { max: usize },

    #[error("operator is not quadratic in the quadratures (relative residual {0:.3e})")]
    DecompositionFailure(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
