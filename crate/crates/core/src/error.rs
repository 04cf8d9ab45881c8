use thiserror::Error;

/// Errors produced by codebook construction, scenario handling and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid wavelength {0} m (must be finite and positive)")]
    InvalidWavelength(f64),

    #[error("length mismatch: expected {expected} elements, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("coefficient {index} is not unit modulus (|c| = {modulus})")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("duplicate target RIS {0}")]
    DuplicateTarget(usize),

    #[error("ray list `{0}` is empty")]
    EmptyRays(&'static str),

    #[error("unknown RIS id {0}")]
    UnknownRis(usize),

    #[error("missing link {from} -> {to}")]
    MissingLink { from: String, to: String },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("leak target {0} equals the focus target")]
    LeakIsFocus(usize),

    #[error(
        "SDP solver did not converge after {iterations} iterations \
         (gap {gap:.3e}, primal residual {primal:.3e}, dual residual {dual:.3e})"
    )]
    SolverNonConvergence {
        iterations: usize,
        gap: f64,
        primal: f64,
        dual: f64,
    },

    #[error("SDP solver numerical failure: {0}")]
    SolverNumerical(String),

    #[error("invalid solver tolerance {0}")]
    InvalidTolerance(f64),

    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),

    #[error("CSV output: {0}")]
    Csv(csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e)
    }
}
