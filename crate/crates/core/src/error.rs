//! Error taxonomy shared across the library.

use thiserror::Error;

/// Failures that do not need to carry solver state.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Exponent field dips to 1 or below, or its spec is self-inconsistent.
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    /// Query outside the domain a tabulated field or a grid covers.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Grid construction or grid/field shape mismatch.
    #[error("grid error: {0}")]
    Grid(String),

    /// Flux evaluation at a genuinely singular point (p < 2, mu = 0, zero gradient).
    #[error("singular flux: p = {p} < 2 with mu = 0 at a zero gradient")]
    SingularFlux { p: f64 },

    /// A quantity that must be finite came out NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Caller passed an argument outside the documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Structural assumption of the decay/smoothing theory fails for these inputs.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Parameter combination the explicit rate formulas do not cover.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Operation needs a trajectory with every step stored.
    #[error("dense trajectory required: {0}")]
    DenseRequired(String),

    /// File ingestion failed (format, not I/O).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<V> = std::result::Result<V, Error>;
