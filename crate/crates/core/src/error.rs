use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {what} is {actual}, cap is {limit}")]
    Size {
        what: &'static str,
        actual: u128,
        limit: u128,
    },
    #[error("source constraint violated: {0}")]
    Constraint(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quantity undefined: {0}")]
    Undefined(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("not a symmetry: {0}")]
    NotSymmetric(String),
    #[error("reflection is not Markovian: {0}")]
    NonMarkovian(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown or unsupported event: {0}")]
    Event(String),
    #[error("sampler gave up: {0}")]
    Sampler(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn size_check(what: &'static str, actual: u128, limit: u128) -> Result<()> {
    if actual > limit {
        Err(Error::Size {
            what,
            actual,
            limit,
        })
    } else {
        Ok(())
    }
}
