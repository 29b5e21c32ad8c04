use thiserror::Error;

use crate::metric::Counterexample;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid group specification: {0}")]
    InvalidGroup(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("size {order} exceeds the cap of {cap}")]
    TooLarge { order: u128, cap: usize },

    #[error("metric {metric} is not defined on group {group}")]
    MetricMismatch { metric: String, group: String },

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("class functions belong to different groups")]
    GroupMismatch,

    #[error("metric is not bi-invariant: {0}")]
    NotBiInvariant(Box<Counterexample>),

    #[error("closed form unsupported: {0}")]
    UnsupportedClosedForm(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("embedding mode error: {0}")]
    Mode(String),
}
