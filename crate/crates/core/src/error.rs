use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {z} lies outside the disc of radius {radius}")]
    DomainViolation { z: Complex64, radius: f64 },

    #[error("pole at {z}; use projective evaluation")]
    Pole { z: Complex64 },

    #[error("series evaluation did not reach tolerance after {terms} terms")]
    PrecisionFailure { terms: usize },

    #[error("unknown gallery entry `{0}`")]
    UnknownName(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tol:e}")]
    NoConvergence { estimate: f64, tol: f64 },

    #[error("integrand not finite on the circle |z| = {radius}")]
    SingularAverage { radius: f64 },

    #[error("target value attained on the contour near |z| = {radius}")]
    ZeroOnCircle { radius: f64 },

    #[error("f(0) equals the target value")]
    OriginHitsTarget,

    #[error("curve is degenerate: {0}")]
    Degenerate(String),

    #[error("evaluation at a stationary point {z}")]
    StationaryPoint { z: Complex64 },

    #[error("characteristic cross-check failed at r = {r}: circle-average {cartan} vs area {area}")]
    CrossCheckMismatch { r: f64, cartan: f64, area: f64 },

    #[error("growth-index fit unstable: residual rms {rms:e} vs tail variation {variation:e}")]
    FitUnstable { rms: f64, variation: f64 },

    #[error("growth index not available")]
    MissingGrowthIndex,

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("image of the curve lies in hyperplane #{index}")]
    ImageInHyperplane { index: usize },

    #[error("no feasible Nochka weights among {scanned} scanned values of theta")]
    InfeasibleAtScanResolution { scanned: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable snake-case name for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DomainViolation { .. } => "domain_violation",
            Error::Pole { .. } => "pole",
            Error::PrecisionFailure { .. } => "precision_failure",
            Error::UnknownName(_) => "unknown_gallery",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::PreconditionViolation(_) => "precondition_violation",
            Error::NoConvergence { .. } => "no_convergence",
            Error::SingularAverage { .. } => "singular_average",
            Error::ZeroOnCircle { .. } => "zero_on_circle",
            Error::OriginHitsTarget => "origin_hits_target",
            Error::Degenerate(_) => "degenerate",
            Error::StationaryPoint { .. } => "stationary_point",
            Error::CrossCheckMismatch { .. } => "cross_check_mismatch",
            Error::FitUnstable { .. } => "fit_unstable",
            Error::MissingGrowthIndex => "missing_growth_index",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::ImageInHyperplane { .. } => "image_in_hyperplane",
            Error::InfeasibleAtScanResolution { .. } => "infeasible_at_scan_resolution",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownName(_) => 2,
            _ => 3,
        }
    }
}
