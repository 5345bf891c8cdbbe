use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("scalars live in different fields (q={0} vs q={1})")]
    MismatchedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("underdetermined fit: {needed} unknowns but only {have} distinct primes")]
    UnderdeterminedFit { needed: usize, have: usize },
    #[error("no Laurent polynomial within the bound fits the samples")]
    InconsistentSamples,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("subspaces live in different ambient spaces")]
    AmbientMismatch,

    #[error("quiver has an oriented cycle")]
    Cyclic,
    #[error("tau is not an involution: {0}")]
    NotInvolution(String),
    #[error("tau does not respect arrow {0}")]
    ArrowNotRespected(String),
    #[error("underlying graph is not of Dynkin type ADE")]
    NotDynkin,
    #[error("unsupported type: {0}")]
    UnsupportedType(String),

    #[error("path rewriting exceeded {0} basis paths")]
    NonTerminatingRewrite(usize),

    #[error("modules live over different algebras or primes")]
    AlgebraMismatch,
    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("projective presentation failed: {0}")]
    PresentationFailure(String),
    #[error("no generalized simple could be peeled from a nonzero module of finite projective dimension")]
    PeelStuck,
    #[error("neither argument has finite projective dimension")]
    NotFiniteDimensionHomological,

    #[error("normal form stuck on a mixed indecomposable of dimension vector {0:?}")]
    NormalFormStuck(Vec<usize>),
    #[error("term supports differ across primes: {0}")]
    AlignmentFailure(String),
    #[error("fit failed for key {key}: {reason}")]
    FitFailure { key: String, reason: String },

    #[error("no indecomposable found with dimension vector {0:?}")]
    SearchExhausted(Vec<usize>),
    #[error("generic extension has several minimizers of dim End")]
    NonUniqueMinimizer,
    #[error("dimension vectors differ")]
    DimVectorMismatch,
    #[error("no distinguished word found for {0}")]
    NoDistinguishedWordFound(String),
    #[error("singular coefficient matrix in grade {0:?}")]
    SingularCoefficientMatrix(Vec<usize>),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. }
            | Error::BudgetExceeded(_)
            | Error::NonTerminatingRewrite(_) => 3,
            Error::Input(_)
            | Error::Cyclic
            | Error::NotInvolution(_)
            | Error::ArrowNotRespected(_)
            | Error::NotDynkin
            | Error::UnsupportedType(_)
            | Error::MismatchedField(..)
            | Error::DimVectorMismatch => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::MismatchedField(..) => "MismatchedField",
            Error::DivisionByZero => "DivisionByZero",
            Error::UnderdeterminedFit { .. } => "UnderdeterminedFit",
            Error::InconsistentSamples => "InconsistentSamples",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::AmbientMismatch => "AmbientMismatch",
            Error::Cyclic => "Cyclic",
            Error::NotInvolution(_) => "NotInvolution",
            Error::ArrowNotRespected(_) => "ArrowNotRespected",
            Error::NotDynkin => "NotDynkin",
            Error::UnsupportedType(_) => "UnsupportedType",
            Error::NonTerminatingRewrite(_) => "NonTerminatingRewrite",
            Error::AlgebraMismatch => "AlgebraMismatch",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::PresentationFailure(_) => "PresentationFailure",
            Error::PeelStuck => "PeelStuck",
            Error::NotFiniteDimensionHomological => "NotFiniteDimensionHomological",
            Error::NormalFormStuck(_) => "NormalFormStuck",
            Error::AlignmentFailure(_) => "AlignmentFailure",
            Error::FitFailure { .. } => "FitFailure",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::NonUniqueMinimizer => "NonUniqueMinimizer",
            Error::DimVectorMismatch => "DimVectorMismatch",
            Error::NoDistinguishedWordFound(_) => "NoDistinguishedWordFound",
            Error::SingularCoefficientMatrix(_) => "SingularCoefficientMatrix",
            Error::Input(_) => "InputError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
