use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants split into two families: shape/configuration problems (bad
/// dimensions, indices, non-Hermitian input) and numerical preconditions
/// (bandwidth, leakage, vanishing overlaps). [`Error::is_numerical`] tells
/// them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude budget exceeded: {requested} entries requested, budget is {budget}")]
    Capacity { requested: usize, budget: usize },

    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("grid too small: half-width {half_width} must cover {required} on each side")]
    GridTooSmall { half_width: f64, required: f64 },

    #[error("momentum bandwidth exceeded: need {required}, grid supports {available}")]
    Bandwidth { required: f64, available: f64 },

    #[error("pointer wave function leaks to the grid boundary (ratio {ratio:e})")]
    Leakage { ratio: f64 },

    #[error("weak value undefined: pre/post-selection overlap {overlap:e} vanishes")]
    VanishingOverlap { overlap: f64 },

    #[error("state has zero weight ({weight:e})")]
    ZeroWeight { weight: f64 },

    #[error("expected {expected} pointers, found {found}")]
    PointerCount { expected: usize, found: usize },

    #[error("unsupported representation: {0}")]
    Representation(String),

    #[error("degenerate fit: {usable} usable points, need at least 3")]
    DegenerateFit { usable: usize },
}

impl Error {
    /// True for violations of numerical preconditions, as opposed to
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Capacity { .. }
                | Error::GridTooSmall { .. }
                | Error::Bandwidth { .. }
                | Error::Leakage { .. }
                | Error::VanishingOverlap { .. }
                | Error::ZeroWeight { .. }
                | Error::Representation(_)
                | Error::DegenerateFit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
