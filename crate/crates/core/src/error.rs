use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pole of the density at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("|Im z| = {im_abs} exceeds the overflow guard {guard}")]
    Overflow { im_abs: f64, guard: f64 },

    #[error("tolerance {requested:e} not reached (estimated error {achieved:e} after {panels} panels)")]
    ToleranceNotReached {
        requested: f64,
        achieved: f64,
        panels: usize,
    },

    #[error("Newton iteration for root k = {k} did not converge after {iterations} steps")]
    NonConvergence { k: u64, iterations: usize },

    #[error("root k = {k} left its strip: z = {re} + {im}i")]
    StripViolation { k: u64, re: f64, im: f64 },

    #[error("no sign change while bracketing root k = {k}")]
    NoSignChange { k: u64 },

    #[error("argument-principle count is indeterminate: winding {winding} (|E| = {min_modulus:e} on the contour)")]
    IndeterminateCount { winding: f64, min_modulus: f64 },

    #[error("|E'(z_k)| = {modulus:e} below guard for k = {k}")]
    DerivativeUnderflow { k: u64, modulus: f64 },

    #[error("curve is degenerate: {0}")]
    Degenerate(String),

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("curve input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
