use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No grid point falls inside the requested interval.
    #[error("empty interval [{s}, {t}] on the path grid")]
    EmptyInterval { s: f64, t: f64 },

    /// Two objects that must share a time grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Circulant embedding produced an eigenvalue below the clamping tolerance.
    #[error(
        "circulant embedding is not nonnegative definite (eigenvalue {eigenvalue:e} at index {index}); \
         use the cholesky method instead"
    )]
    EmbeddingFailed { index: usize, eigenvalue: f64 },

    /// The covariance matrix could not be factorized.
    #[error("covariance matrix is numerically not positive definite")]
    NotPositiveDefinite,

    /// The implicit step equation could not be solved.
    #[error("implicit step {step} (t = {t}) did not converge: {reason}")]
    NonConvergence { step: usize, t: f64, reason: String },

    /// A drift claimed to be homogeneous failed the lattice validation.
    #[error("drift is not homogeneous with degrees (m = {m}, n = {n}): {detail}")]
    HomogeneityViolation { m: f64, n: f64, detail: String },

    /// A CIR drift violates one or more of the structural conditions.
    #[error("CIR drift violates condition(s) {failed}: {detail}")]
    CirConditions { failed: String, detail: String },

    /// The configuration is degenerate (for example every branch of a minimum is infinite).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_hurst_open_unit(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        domain(format!("Hurst parameter must lie in (0, 1), got {hurst}"))
    }
}

pub(crate) fn check_hurst_long_memory(hurst: f64) -> Result<()> {
    if hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        domain(format!("Hurst parameter must lie in (1/2, 1), got {hurst}"))
    }
}
