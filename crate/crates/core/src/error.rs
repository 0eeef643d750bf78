use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "n_max = {0} is too small; at least 2 is needed for the two-quantum raising operators"
    )]
    NMaxTooSmall(usize),

    #[error("operands live on different bases (n_max {left} vs {right})")]
    BasisMismatch { left: usize, right: usize },

    #[error("function of S is singular at total number n = {n} (S = {s})")]
    SingularFunction { n: usize, s: f64 },

    #[error("eta must be positive and finite, got {0}")]
    InvalidEta(f64),

    #[error(
        "overflow: e^(eta*(n_max+1)/2)*sqrt(dim) exceeds the floating-point range \
         (eta = {eta}, n_max = {n_max}); use a smaller eta or n_max"
    )]
    Overflow { eta: f64, n_max: usize },

    #[error("invalid phase point: {0}")]
    InvalidPhasePoint(String),

    #[error("invalid coherent label: {0}")]
    InvalidLabel(String),

    #[error("j_max = {j_max} needs n_max >= {needed} (have {n_max})")]
    InsufficientHeadroom {
        j_max: usize,
        n_max: usize,
        needed: usize,
    },

    #[error("invalid (j, m) = ({j}, {m}): {reason}")]
    InvalidAngularMomentum { j: usize, m: i64, reason: String },

    #[error("phase calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("unknown operator name '{0}'")]
    UnknownOperator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
