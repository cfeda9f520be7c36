use thiserror::Error;

use crate::panel::Period;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Degenerate,
    Numeric,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("non-finite income {value} at index {index} of period {period}")]
    NonFiniteIncome { period: Period, index: usize, value: f64 },
    #[error("{measure} requires strictly positive incomes; period {period} has {value} at index {index}")]
    NonPositiveIncome {
        measure: String,
        period: Period,
        index: usize,
        value: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric error in {context}{}", .index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Numeric { context: String, index: Option<usize> },
    #[error("poverty line {line} in period {period} leaves headcount {headcount}; need some poor and some non-poor")]
    NoPoorOrAllPoor {
        period: Period,
        line: f64,
        headcount: f64,
    },
    #[error("inequality variation {delta_i:e} is within {epsilon:e} of zero; ratio is undefined")]
    RatioDegenerate { delta_i: f64, epsilon: f64 },
    #[error("variance {value:e} is negative beyond tolerance {tolerance:e}")]
    NegativeVariance { value: f64, tolerance: f64 },
    #[error("bootstrap unreliable: estimator degenerate in {failed} of {total} resamples")]
    OracleUnreliable { failed: usize, total: usize },
    #[error("no closed form for {0}")]
    Unsupported(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Unsupported(_) => ErrorKind::Config,
            Error::InvalidPanel(_)
            | Error::NonFiniteIncome { .. }
            | Error::NonPositiveIncome { .. } => ErrorKind::Data,
            Error::NoPoorOrAllPoor { .. }
            | Error::RatioDegenerate { .. }
            | Error::OracleUnreliable { .. } => ErrorKind::Degenerate,
            Error::Domain(_) | Error::Numeric { .. } | Error::NegativeVariance { .. } => {
                ErrorKind::Numeric
            }
        }
    }

    pub(crate) fn numeric(context: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            index: None,
        }
    }
}
