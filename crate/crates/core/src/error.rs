use thiserror::Error;

/// Errors produced by the prediction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (wrong dimension, bad step, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A Runge-Kutta stage produced a non-finite value.
    #[error("numerical blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("integration failed at step {step} (t = {t})")]
    StepFailed { step: usize, t: f64 },

    /// One member of a Monte-Carlo ensemble failed to integrate.
    #[error("ensemble member {member} failed at t = {t}")]
    MemberFailed { member: usize, t: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("rejection sampler gave up after {0} proposals")]
    Sampler(usize),

    #[error("lag {tau} outside kernel table range [0, {max}]")]
    Range { tau: f64, max: f64 },

    #[error(
        "memory horizon t = {needed} exceeds kernel table horizon {available}; \
         re-estimate the kernel with a larger max lag"
    )]
    Horizon { needed: f64, available: f64 },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
