use thiserror::Error;

/// Errors produced by the analytic, simulation and optimization layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {arg} outside the domain of {function}")]
    Domain { function: &'static str, arg: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("power-splitting fraction rho = {rho} is degenerate for {what}; use the limit branch")]
    DegenerateRho { what: &'static str, rho: f64 },

    #[error("{what} = {value} falls outside (0, 1); scenario is outside the approximation regime")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("closed-form p3 = {raw} needs clamping by more than {limit}; approximation regime violated")]
    RegimeViolation { raw: f64, limit: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
