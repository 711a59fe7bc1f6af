use thiserror::Error;

/// Errors raised by the numeric kernels.
///
/// The variants are coarse on purpose: the CLI maps each one to a
/// machine-readable category and an exit status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("prime table needs limit >= 2, got {0}")]
    EmptyTable(u64),

    #[error("prime table limit {limit} is smaller than the requested bound {requested}")]
    TableTooSmall { limit: u64, requested: f64 },

    #[error("series diverges for sigma = {sigma} (need sigma > 1/2)")]
    Divergent { sigma: f64 },

    #[error("s = 1 is the pole of zeta")]
    Pole,

    #[error("requested precision {target:e} not attainable; achieved bound {achieved:e}")]
    Precision { target: f64, achieved: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("series tail bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailTooLarge { bound: f64, tolerance: f64 },

    #[error("refused: {reason} (estimated requirement: {requirement})")]
    Refused { reason: String, requirement: String },

    #[error("contour passes within {clearance:e} of a solution near s = {sigma} + {t}i; perturb the boundary")]
    BoundaryTooClose { clearance: f64, sigma: f64, t: f64 },

    #[error("argument tracking did not stabilise: {0}")]
    RefinementExhausted(String),

    #[error("quadrature budget exhausted with {covered:.6} of the interval covered")]
    PartialResult { covered: f64 },

    #[error("model grid does not cover the samples: {0}")]
    Coverage(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::EmptyTable(_) | Error::TableTooSmall { .. } => "table",
            Error::Divergent { .. } | Error::Pole | Error::Domain(_) => "domain",
            Error::Precision { .. } | Error::TailTooLarge { .. } => "precision",
            Error::Refused { .. } => "refused",
            Error::BoundaryTooClose { .. } => "boundary",
            Error::RefinementExhausted(_) | Error::PartialResult { .. } => "numerical",
            Error::Coverage(_) | Error::InvalidExperiment(_) => "experiment",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
