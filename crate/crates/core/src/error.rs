use thiserror::Error;

use crate::model::ProjectiveKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input vectors are numerically dependent (smallest Gram eigenvalue {min_eigenvalue:e})")]
    DegenerateInput { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("real dimension {m1} is not admissible for {kind:?} projective space")]
    BadDimension { kind: ProjectiveKind, m1: usize },

    #[error("frame with n={n}, d={d} does not span the {ambient}-dimensional ambient space")]
    IncompleteFrame { n: usize, d: usize, ambient: usize },

    #[error("frame size n={n}, d={d} exceeds ambient dimension {ambient}")]
    FrameTooLarge { n: usize, d: usize, ambient: usize },

    #[error("classifier case mismatch: {0}")]
    CaseMismatch(String),

    #[error("invalid factor model: {0}")]
    BadFactor(String),

    #[error("bad geodesic closure: {0}")]
    BadClosure(String),

    #[error("curve sample is incomplete: {0}")]
    IncompleteSample(String),

    #[error("numerical blowup during {0}")]
    NumericalBlowup(String),
}
