use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("non-constant exponent at byte {pos}")]
    NonConstantExponent { pos: usize },

    #[error("domain error: {what} in `{subexpr}`")]
    Domain { what: String, subexpr: String },

    #[error("point is missing coordinate `{0}`")]
    MissingCoordinate(String),

    #[error("singular cometric at {point}: |det| = {det:.3e}")]
    SingularCometric { point: String, det: f64 },

    #[error("symbolic inversion supports dim <= {max}, got {dim}")]
    SymbolicInversionDim { dim: usize, max: usize },

    #[error("sampling guards rejected {retries} candidates for one point; domain too singular")]
    GuardExhausted { retries: usize },

    #[error("chart mismatch: expected `{expected}`, got `{got}`")]
    ChartMismatch { expected: String, got: String },

    #[error("invalid chart `{name}`: {msg}")]
    InvalidChart { name: String, msg: String },

    #[error("product chart: coordinate `{0}` appears in both factors")]
    CoordinateCollision(String),

    #[error("degenerate covector plane at {point}: denominator {den:.3e}")]
    DegeneratePlane { point: String, den: f64 },

    #[error("form degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("tensor does not live on the named factor: {0}")]
    FactorMismatch(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("suite `{suite}` does not apply to fixture `{fixture}`: {why}")]
    SuiteMismatch {
        suite: String,
        fixture: String,
        why: String,
    },

    #[error("definition file: {0}")]
    Definition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
