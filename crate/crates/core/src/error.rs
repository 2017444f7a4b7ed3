use thiserror::Error;

use crate::pim::Digit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mixed scalar backends")]
    MixedBackend,
    #[error("division by zero")]
    DivisionByZero,
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid map parameters: {0}")]
    InvalidParameter(String),
    #[error("invalid map spec: {0}")]
    InvalidSpec(String),
    #[error("{0} is not a digit of this map")]
    UnknownDigit(Digit),
    #[error("symbol {0} is not in the alphabet")]
    UnknownSymbol(i64),
    #[error("cylinder of word {0:?} is empty")]
    EmptyCylinder(Vec<Digit>),
    #[error("map is not well ordered")]
    NotWellOrdered,
    #[error("empty word")]
    EmptyWord,
    #[error("point {0} lies outside [0,1)")]
    OutOfDomain(String),
    #[error("combinatorial budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
