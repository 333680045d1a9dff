use thiserror::Error;

/// Errors raised by the solution, oracle and front-end layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric domain error in {what}: argument {arg}")]
    NumericDomain { what: &'static str, arg: f64 },

    #[error("quasi-relativism violated at r = {r}: eta^2 = {eta_sq} >= 1")]
    QuasiRelativism { r: f64, eta_sq: f64 },

    #[error("derivative is singular at x = {x}")]
    Singular { x: f64 },

    #[error("map value {value} lies beyond the collapse endpoint {endpoint}")]
    PastCollapse { value: f64, endpoint: f64 },

    #[error("layer r0 = {r0} is past its shock at t = {t} (jacobian {jacobian})")]
    PastShock { r0: f64, t: f64, jacobian: f64 },

    #[error("quadrature tolerance not met: estimate {estimate}, error bound {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
