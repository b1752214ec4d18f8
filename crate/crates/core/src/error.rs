use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: value {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("orbit diverged at step {step} (state {state})")]
    Divergence { step: usize, state: f64 },

    #[error("orbit degenerated at step {step} (state {state})")]
    Degenerate { step: usize, state: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("value {value} lies outside the support of {law}")]
    SupportMismatch { law: String, value: f64 },

    #[error("u = 0 has no finite quantile: {0} is unbounded below")]
    SupportLowerBound(String),

    #[error("u = 1 has no finite quantile: {0} is unbounded above")]
    SupportUpperBound(String),

    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("zero variance input")]
    ZeroVariance,

    #[error("singular Frobenius-Perron term at y = {0}")]
    Singular(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of the numerics themselves (divergence, degeneracy,
    /// singular terms, degenerate samples), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::Degenerate { .. } | Error::ZeroVariance | Error::Singular(_)
        )
    }
}

pub(crate) fn check_interval(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::Domain { what, value, lo, hi })
    }
}
