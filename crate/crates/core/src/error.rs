use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `|det W(η)|` fell to or below the singularity tolerance.
    #[error("singular Euler-angle configuration: |det W| = {det:.3e} <= {tolerance:.1e}")]
    SingularConfiguration { det: f64, tolerance: f64 },

    #[error("invalid Euler sequence {0:?}: axes must be in 1..=3 with consecutive axes distinct")]
    InvalidSequence([u8; 3]),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Commanded thrust direction tilts past the configured bound.
    #[error("infeasible attitude: commanded tilt {tilt:.3} rad exceeds {limit:.3} rad")]
    InfeasibleAttitude { tilt: f64, limit: f64 },

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
