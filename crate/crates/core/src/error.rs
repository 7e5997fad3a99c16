use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "grid too coarse for the propagator chirp: {points} points per axis, \
         at least {min_points} required (max frequency {max_frequency:.6}, nyquist {nyquist:.6})"
    )]
    RefinementRequired {
        points: usize,
        min_points: usize,
        max_frequency: f64,
        nyquist: f64,
    },

    #[error("time step {dt} violates the phase-resolution guard; largest admissible step is {max_dt}")]
    StepSize { dt: f64, max_dt: f64 },

    #[error("domain too small: boundary-shell mass {boundary_mass:e} exceeds {limit:e} at t = {time}")]
    DomainTooSmall { time: f64, boundary_mass: f64, limit: f64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error(
        "resolution certificate failed at lambda = {lambda}: nu / level spacing = {ratio:.4} < {required}; \
         enlarge the box or increase nu"
    )]
    Resolution { lambda: f64, ratio: f64, required: f64 },

    #[error("Birman-Schwinger operator is ill-conditioned (condition estimate {condition:e})")]
    Conditioning { condition: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
