use thiserror::Error;

/// Errors raised anywhere in the evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contraction order {k} out of range (max {max})")]
    OrderOutOfRange { k: usize, max: usize },

    #[error("metric order m = {0} is outside the supported range 2..=8")]
    UnsupportedOrder(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite result in {0}")]
    NonFinite(String),

    #[error("singular matrix ({what}, condition estimate {condition:.3e})")]
    SingularMatrix { what: &'static str, condition: f64 },

    #[error("closed form undefined at m = 4 (division by m - 4)")]
    DegenerateOrderFour,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the numerical state rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NonFinite(_)
                | Error::SingularMatrix { .. }
                | Error::DegenerateOrderFour
        )
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
