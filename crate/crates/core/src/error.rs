use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error("quadrature did not converge in {op}: estimated error {error:.3e} after {subdivisions} subdivisions")]
    Quadrature {
        op: &'static str,
        error: f64,
        subdivisions: usize,
    },

    #[error("root is not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e}")]
    Bracketing {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// ODE integration failed (step underflow or step budget exhausted).
    #[error("trajectory integration failed: {0}")]
    Integration(String),

    #[error("kinematics error: {0}")]
    Kinematics(String),

    /// A lookup outside a tabulated range.
    #[error("{op}: s = {s} outside tabulated range [{lo}, {hi}]")]
    OutOfTable {
        op: &'static str,
        s: f64,
        lo: f64,
        hi: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
}

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}

/// Fails with a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain(
            op,
            format!("{name} must be positive and finite, got {value}"),
        ))
    }
}
