use thiserror::Error;

/// Every failure the library reports. The variant name doubles as the
/// machine-readable error tag emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("degenerate form")]
    DegenerateForm,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not an isometry of the reference form")]
    NotIsometry,
    #[error("isometries refer to different forms")]
    FormMismatch,
    #[error("search budget exceeded: {needed} candidates per column, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("modulus {0} is below 3")]
    InvalidModulus(i64),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("form is not Lorentzian; only index-one forms are supported")]
    UnsupportedSignature,
    #[error("element has the wrong class: {0}")]
    WrongClass(String),
    #[error("initial form is not recurrent under the action")]
    NotRecurrent,
    #[error("averaging did not converge after {0} terms")]
    NoConvergence(usize),
    #[error("all generators are elliptic")]
    Elementary,
    #[error("no unbounded invariant timelike subspace found: {0}")]
    Inconclusive(String),
    #[error("orbit measure not supported: {0}")]
    MeasureNotSupported(String),
    #[error("element has bounded powers")]
    BoundedPowers,
    #[error("polynomial is not a monic integer polynomial with unit constant term")]
    NotUnitPolynomial,
    #[error("invalid Lie algebra split: {0}")]
    InvalidSplit(String),
    #[error("invalid Lie algebra presentation: {0}")]
    InvalidPresentation(String),
    #[error("degenerate fiber direction")]
    DegenerateFiber,
    #[error("unsupported representation: {0}")]
    UnsupportedRep(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

impl Error {
    /// Stable tag used in error documents, e.g. `"BoundedPowers"`.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidForm(_) => "InvalidForm",
            Error::DegenerateForm => "DegenerateForm",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotIsometry => "NotIsometry",
            Error::FormMismatch => "FormMismatch",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidModulus(_) => "InvalidModulus",
            Error::NotInvertible => "NotInvertible",
            Error::UnsupportedSignature => "UnsupportedSignature",
            Error::WrongClass(_) => "WrongClass",
            Error::NotRecurrent => "NotRecurrent",
            Error::NoConvergence(_) => "NoConvergence",
            Error::Elementary => "Elementary",
            Error::Inconclusive(_) => "Inconclusive",
            Error::MeasureNotSupported(_) => "MeasureNotSupported",
            Error::BoundedPowers => "BoundedPowers",
            Error::NotUnitPolynomial => "NotUnitPolynomial",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::InvalidPresentation(_) => "InvalidPresentation",
            Error::DegenerateFiber => "DegenerateFiber",
            Error::UnsupportedRep(_) => "UnsupportedRep",
            Error::Parse(_) => "Parse",
            Error::Overflow(_) => "Overflow",
        }
    }

    /// Malformed input, as opposed to a well-formed request the mathematics rejects.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::DimensionMismatch { .. } | Error::InvalidForm(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
