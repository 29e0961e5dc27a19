use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate covering: {0}")]
    DegenerateCovering(String),
    #[error("line is not admissible: {0}")]
    NotAdmissible(String),
    #[error("kernel evaluated on the diagonal")]
    DiagonalSingularity,
    #[error("period solve failed: {0}")]
    PeriodSolveFailure(String),
    #[error("surface lies on the deformation divisor (|det(B+q)| = {det:.3e})")]
    OnDeformationDivisor { det: f64 },
    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),
    #[error("expansion failed: {0}")]
    ExpansionFailure(String),
    #[error("contour collision: {0}")]
    ContourCollision(String),
    #[error("Stokes ray crossed: {0}")]
    StokesRayCrossed(String),
    #[error("quadrature failed: error estimate {estimate:.3e} above tolerance {tolerance:.3e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },
    #[error("tail bound violated: {0}")]
    TailBoundViolated(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("basis decomposition unavailable: {0}")]
    BasisDecompositionUnavailable(String),
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
