use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error(
        "Fock truncation n_max = {n_max} too small: discarded thermal tail mass {tail:e} exceeds 1e-3"
    )]
    TruncationTooSmall { n_max: usize, tail: f64 },

    #[error("ground level is degenerate within {gap:e}")]
    DegenerateGroundState { gap: f64 },

    #[error("time {t} outside the pulse window [0, {tau}]")]
    TimeOutOfRange { t: f64, tau: f64 },

    #[error("integration step {dt} too large: {reason}")]
    StepTooLarge { dt: f64, reason: String },

    #[error("state lost positivity (min eigenvalue {min_eig:e}); reduce the integration step")]
    PositivityViolation { min_eig: f64 },

    #[error("unphysical covariance matrix (det s = {det} < 1/4)")]
    UnphysicalCovariance { det: f64 },

    #[error("measurement outcome unreachable (probability {probability:e})")]
    MeasurementUnreachable { probability: f64 },

    #[error("spin frequency is not positive (omega_A = {value} at t = {t})")]
    NonPositiveFrequency { t: f64, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("pulse file: {0}")]
    PulseFormat(String),
}

impl Error {
    /// True for errors raised by a violated numerical invariant, as opposed
    /// to a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonHermitian { .. }
                | Error::PositivityViolation { .. }
                | Error::UnphysicalCovariance { .. }
                | Error::DegenerateGroundState { .. }
                | Error::InvalidState(_)
        )
    }
}
