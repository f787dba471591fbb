use thiserror::Error;

/// Errors shared across the kernel and the calculus layers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unsupported algebraic extension: {0}")]
    UnsupportedExtension(String),

    #[error("jet order {order} exceeds the session cutoff {max}")]
    JetOrderOverflow { order: u32, max: u32 },

    #[error("derivative chain for `{0}` exhausted")]
    ChainDepthExceeded(String),

    #[error("could not draw a valid jet point: {0}")]
    DegenerateSampling(String),

    #[error("expression is not a total x-derivative")]
    NotATotalDerivative,

    #[error("antiderivative leaves the rational class: {0}")]
    IntegrandOutsideClass(String),

    #[error("transformed equation is not closed in the target jets: {0}")]
    NotClosedForm(String),

    #[error("relation is not affine in the designated variable: {0}")]
    NotAffine(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("inconsistent relations: {0}")]
    InconsistentRelations(String),

    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },

    #[error("{0}")]
    BadArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
