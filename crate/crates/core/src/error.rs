use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated its documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A non-finite value reached an operation that requires finite data.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The collocation nodes do not define an invertible matrix.
    #[error("singular configuration: {0}")]
    Singular(String),

    /// Samples that must coincide at a shared node are too far apart.
    #[error("discontinuity at patch {patch}: shared samples differ by {gap:e}")]
    Discontinuity { patch: usize, gap: f64 },

    /// The tangent vanishes at a grid node, so no normal can be defined.
    #[error("degenerate tangent at patch {patch}, node {node}")]
    DegenerateTangent { patch: usize, node: usize },

    /// A shape gradient is undefined at the queried point.
    #[error("degenerate gradient: {0}")]
    DegenerateGradient(String),

    /// The curve has collapsed (e.g. zero length).
    #[error("degenerate curve: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
