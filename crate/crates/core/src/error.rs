use thiserror::Error;

/// Errors produced across the simulation pipeline.
#[derive(Debug, Error)]
pub enum SimError {
    /// Operator or state dimension does not match the expected layout.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar argument violates its stated domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration input is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical procedure failed (integrator tolerance, singular system,
    /// non-convergence) and the failure must not be silently accepted.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Too many Monte Carlo samples aborted for the run to be trusted.
    #[error("sample failure budget exceeded: {failed} of {total} samples aborted (first: {first})")]
    SampleBudget {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
