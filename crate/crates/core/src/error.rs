use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element {element} does not belong to group {group}")]
    ForeignElement { element: String, group: String },

    #[error("operands live over different groups or cocycles")]
    Mismatch,

    #[error("invalid group descriptor: {0}")]
    InvalidGroup(String),

    #[error("invalid finite group table: {0}")]
    InvalidTable(String),

    #[error("ball of radius {radius} has {size} elements, above the cap of {cap}")]
    BallTooLarge { radius: usize, size: u128, cap: usize },

    #[error("invalid length function: {0}")]
    InvalidLength(String),

    #[error("length is not symmetric on the sample: d(g)={forward} but d(g^-1)={backward} at g={element}")]
    AsymmetricLength {
        element: String,
        forward: f64,
        backward: f64,
    },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed normal form: {0}")]
    MalformedNormalForm(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
