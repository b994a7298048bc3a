//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // potential model
    #[error("cannot parse potential spec: {0}")]
    Parse(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("beta = {beta} lies outside the analyticity cone |beta| <= {beta0}")]
    OutsideAnalyticityCone { beta: f64, beta0: f64 },
    #[error("radius {r} lies inside the unscaled region (r0 = {r0})")]
    InsideCore { r: f64, r0: f64 },
    #[error("power-law fit failed: {0}")]
    FitFailed(String),
    #[error("decay hypotheses were not verified for this potential")]
    HypothesesNotVerified,

    // wells
    #[error("no local minimum found in the scanned domain")]
    NoMinimum,
    #[error("two minima tie for the global minimum (|dF| = {gap:e})")]
    TieAtGlobalMin { gap: f64 },
    #[error("point {0} lies outside the scanned domain")]
    OutOfDomain(f64),
    #[error("grid with {0} nodes is too large for path enumeration")]
    TooLarge(usize),
    #[error("two well depths coincide within 1e-10 ({0})")]
    DegenerateDepths(f64),
    #[error("adaptive quadrature did not reach tolerance")]
    QuadratureFailure,

    // operators
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("scaling angle {beta} exceeds the admissible {beta0}")]
    ConeViolation { beta: f64, beta0: f64 },
    #[error("truncation too tight: |V(R_max)| = {v:e} > 1e-3 eps = {limit:e}")]
    TruncationTooTight { v: f64, limit: f64 },

    // solvers
    #[error("eigenvalue cluster unresolved near index {index}")]
    ClusterUnresolved { index: usize },
    #[error("shift is (numerically) an eigenvalue")]
    SingularShift,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("no resonance found inside the disk around seed {seed:e}")]
    ResonanceNotFound { seed: f64 },

    // symbols
    #[error("scan grid is empty")]
    EmptyGrid,
    #[error("scan region {{V <= (1 + c_S) lambda}} is empty")]
    RegionEmpty,

    // pipeline
    #[error("depth fit needs at least 4 points, got {0}")]
    InsufficientPoints(usize),
    #[error("eigenvalue {0:e} is not positive")]
    NonPositiveEigenvalue(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
