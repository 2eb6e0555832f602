//! Error type shared by every module in the crate.

/// Failure modes of a verification run.
///
/// `Domain` marks inputs outside an operation's contract, `NonConvergence`
/// marks honest numerical failure (series or quadrature budget exhausted,
/// truncation too short), and `Inconsistent` marks a broken internal
/// cross-check: two routes that must agree exactly did not.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("internal cross-check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn non_convergence(msg: impl Into<String>) -> Self {
        Error::NonConvergence(msg.into())
    }

    pub fn inconsistent(msg: impl Into<String>) -> Self {
        Error::Inconsistent(msg.into())
    }
}
