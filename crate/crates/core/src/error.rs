use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not strongly convex: smallest eigenvalue of the averaged Hessian is {min_eig:e}")]
    NotStronglyConvex { min_eig: f64 },

    #[error("hessian of component {index} is not symmetric (asymmetry {asym:e})")]
    NotSymmetric { index: usize, asym: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("empty problem: at least one component is required")]
    Empty,

    #[error("spec violation: {0}")]
    Spec(String),

    #[error("oracle precondition: {0}")]
    Oracle(String),

    #[error("herding precondition: {0}")]
    Herding(String),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("assumption audit refused {theorem}: {reason}")]
    AssumptionRefused { theorem: String, reason: String },

    #[error("step-size grid does not cover regime interval [{lo:e}, {hi:e}): {reason}")]
    UncoveredRegime { lo: f64, hi: f64, reason: String },

    #[error("rate fit: {0}")]
    RateFit(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
