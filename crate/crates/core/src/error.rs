use thiserror::Error;

use crate::algebra::FieldId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: FieldId, right: FieldId },

    #[error("division by zero in {0}")]
    DivisionByZero(FieldId),

    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` has no deformation named `{name}`")]
    UnknownDeformation { model: String, name: String },

    #[error("model `{0}` has no displacement data loaded")]
    MissingDisplacement(String),

    #[error("translation {translation} at entry ({row}, {col}) is not in the return module")]
    NotInReturnModule { row: usize, col: usize, translation: String },

    #[error("substitution matrix is not primitive")]
    NotPrimitive,

    #[error("Perron-Frobenius eigenvalue {found} does not match the expected {expected}")]
    EigenvalueMismatch { expected: f64, found: f64 },

    #[error("internal cutoff is required for a lattice with dense physical projection")]
    MissingCutoff,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
