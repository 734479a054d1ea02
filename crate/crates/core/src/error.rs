use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh refinement level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { level: usize, max: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("Neumann arcs overlap: [{0}, {1}) intersects another interval")]
    OverlappingArcs(f64, f64),

    #[error("Jacobian determinant {a:.3e} is not positive at ({x:.6}, {y:.6}), t = {t}")]
    NonPositiveJacobian { a: f64, t: f64, x: f64, y: f64 },

    #[error("trajectory left the field domain at t = {t}")]
    TrajectoryEscape { t: f64 },

    #[error("operation is not supported for this deformation family: {0}")]
    Unsupported(&'static str),

    #[error("vector field category mismatch: {0}")]
    CategoryMismatch(String),

    #[error("mass matrix has a nonpositive pivot at dof {0}")]
    SingularMass(usize),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear system is numerically singular: {0}")]
    SingularSystem(String),

    #[error("spectral gap undefined: {0}")]
    GapUndefined(String),

    #[error("simplicity gap check failed: lambda_2 - lambda_1 = {gap:.3e} below threshold {threshold:.3e}")]
    GapTooSmall { gap: f64, threshold: f64 },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("first eigenfunction is not radially symmetric (radial fraction {0:.6})")]
    RadialSymmetryViolated(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LevelTooLarge { .. }
            | Error::InvalidMesh(_)
            | Error::OverlappingArcs(..)
            | Error::Unsupported(_)
            | Error::CategoryMismatch(_)
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
