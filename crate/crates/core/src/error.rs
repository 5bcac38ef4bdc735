use thiserror::Error;

/// Errors raised by the operator builders, propagators and signal analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock truncation n_max = {n_max} is invalid (need n_max >= 2)")]
    InvalidDims { n_max: usize },

    #[error("truncation too small: n_max = {n_max}, need at least {required}")]
    TruncationTooSmall { required: usize, n_max: usize },

    #[error("transformed Hamiltonian undefined for eta = 0 with nonzero detuning")]
    EtaZeroUndefined,

    #[error(
        "outside the RWA regime: |nu - 2 omega| / nu = {relative_offset:e} exceeds {tolerance:e}"
    )]
    RegimeViolation {
        relative_offset: f64,
        tolerance: f64,
    },

    #[error("coupling g = eta nu / 2 vanishes; scaled time tau = g t is undefined")]
    ZeroCoupling,

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("time grid must be non-empty, finite and strictly increasing")]
    InvalidGrid,

    #[error("envelope window {window} below minimum {minimum}")]
    WindowTooSmall { window: f64, minimum: f64 },

    #[error("series spans tau = {span}, need at least {required}")]
    SeriesTooShort { span: f64, required: f64 },

    #[error("no post-collapse revival found in the envelope")]
    NoRevivalFound,
}

impl Error {
    /// True for violations of a physical precondition (regime, truncation,
    /// singular parameters) as opposed to malformed input.
    pub fn is_physics_precondition(&self) -> bool {
        matches!(
            self,
            Error::TruncationTooSmall { .. }
                | Error::EtaZeroUndefined
                | Error::RegimeViolation { .. }
                | Error::ZeroCoupling
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
