use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:.3e}")]
    Asymmetric { max_asymmetry: f64 },

    #[error("eigenvalue iteration did not converge at index {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },

    #[error("truncation did not converge; last deviation {last_deviation:.3e} at n_max = {n_max}")]
    TruncationNotConverged { n_max: usize, last_deviation: f64 },

    #[error("no sign change in bracket: f({lo}) has sign {sign_lo}, f({hi}) has sign {sign_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        sign_lo: f64,
        sign_hi: f64,
    },

    #[error("need at least {needed} points for a fit, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("non-positive ordinate at k = {0:?}")]
    NonPositiveOrdinate(Vec<usize>),

    #[error("scan failed at control value {control}: {source}")]
    ScanPoint {
        control: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::TruncationNotConverged { .. } => true,
            Error::NoSignChange { .. }
            | Error::InsufficientPoints { .. }
            | Error::NonPositiveOrdinate(_) => true,
            Error::ScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
