use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Certification batteries never error on a failing check; those findings
/// live in the returned report. Errors here mean the input broke a
/// contract or a numerical routine gave up.
#[derive(Debug, Clone, Error)]
pub enum Gamma3Error {
    /// Malformed input: non-finite entries, shape mismatch, out-of-range
    /// parameter.
    #[error("input error: {0}")]
    Input(String),

    /// A documented precondition was violated (e.g. grossly non-Hermitian
    /// matrix passed to a Hermitian eigensolver, non-commuting family).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical routine failed to reach its tolerance; carries the
    /// residual it got stuck at.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
}

pub type Result<V> = std::result::Result<V, Gamma3Error>;
