use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid element: expected {expected} coordinates, got {got}")]
    InvalidElement { expected: usize, got: usize },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("not a central idempotent: {0}")]
    NotCentralIdempotent(String),

    #[error("basis does not span a unital subring: {0}")]
    NotASubring(String),

    #[error("groupoid axiom violated ({reason}); witness {witness}")]
    GroupoidAxiomViolation { reason: String, witness: String },

    #[error("empty object set")]
    EmptyObjectSet,

    #[error("unknown object {0:?}")]
    UnknownObject(String),

    #[error("groupoid is not connected")]
    NotConnected,

    #[error("partial action axiom {axiom} violated; witness {witness}")]
    PartialActionAxiomViolation { axiom: String, witness: String },

    #[error("associativity failure on basis triple {0}")]
    AssociativityFailure(String),

    #[error("central idempotent check failed: {0}")]
    CentralityFailure(String),

    #[error("factorization isomorphism failed at step {step}: {witness}")]
    IsoFailure { step: u8, witness: String },

    #[error("Frobenius identity `{identity}` failed: {witness}")]
    FrobeniusVerificationFailure { identity: String, witness: String },

    #[error("parse error{}: {message}", location(*.line, *.column))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub(crate) fn groupoid(reason: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::GroupoidAxiomViolation {
            reason: reason.into(),
            witness: witness.into(),
        }
    }

    pub(crate) fn axiom(axiom: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::PartialActionAxiomViolation {
            axiom: axiom.into(),
            witness: witness.into(),
        }
    }

    /// True for errors caused by malformed input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}
