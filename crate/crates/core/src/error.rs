use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A numeric argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid, platform, or run configuration violates a stated bound.
    #[error("configuration error: {0}")]
    Config(String),

    /// A density with no mass was handed to a moment computation.
    #[error("degenerate density: total mass is zero")]
    DegenerateDensity,

    /// Propagation losses reduced the signal below anything detectable.
    #[error("signal extinguished by loss: {loss_db:.2} dB leaves no detectable signal photons")]
    SignalExtinguished { loss_db: f64 },

    /// No propagation distance below the search limit reaches the contamination target.
    #[error(
        "separation unreachable: contamination stays above {threshold} up to {max_length_m} m"
    )]
    SeparationUnreachable { threshold: f64, max_length_m: f64 },

    /// The contamination objective misbehaved; the bracket cannot be trusted.
    #[error(
        "contamination is not monotone across the solver bracket near {length_m} m; \
         rerun with a finer distance scan before trusting a solution"
    )]
    NonMonotoneObjective { length_m: f64 },

    /// Platform name lookup failed.
    #[error("platform '{0}' not found")]
    PlatformNotFound(String),

    /// Pulse-train centroids never satisfy the resolution criterion.
    #[error("not separated within bin budget")]
    NotSeparated,

    /// A numerical self-check failed; the result cannot be trusted.
    #[error("model integrity check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
