use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {0} does not lie in the domain")]
    OutsideDomain(Complex64),

    #[error("ray leaves the domain at {0}")]
    RayNotInterior(Complex64),

    #[error("cone is not interior to the domain: sample {0} lies outside")]
    ConeNotInterior(Complex64),

    #[error("invalid cover: target point {0} is not covered")]
    InvalidCover(Complex64),

    #[error("pixel budget exceeded: {requested} pixels requested, budget {budget}")]
    PixelBudget { requested: u64, budget: u64 },

    #[error("pieces {0} and {1} overlap")]
    OverlappingPieces(usize, usize),

    #[error("function is singular at {0}")]
    Singular(Complex64),

    #[error("function is not analytic on the required region: {0}")]
    NotAnalytic(String),

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("pole {pole} lies within {distance:e} of the path (clearance {clearance:e})")]
    PoleTooClose {
        pole: Complex64,
        distance: f64,
        clearance: f64,
    },

    #[error("quadrature tolerance not met: estimate {best} with error {error:e} > {tol:e}")]
    ToleranceNotMet {
        best: Complex64,
        error: f64,
        tol: f64,
    },

    #[error("non-finite integrand value at {0}")]
    NonFinite(Complex64),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl Error {
    /// True for failures of a numerical tolerance rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ToleranceNotMet { .. } | Error::NonFinite(_) | Error::Sampling(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
