use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bodies {i} and {j} collide (distance {distance:e} below floor {floor:e})")]
    Collision {
        i: usize,
        j: usize,
        distance: f64,
        floor: f64,
    },
    #[error("moment of inertia {0:e} is degenerate")]
    DegenerateInertia(f64),
    #[error("configuration norm {0:e} is too small to define an orbit tangent")]
    ZeroConfiguration(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mass {index} is not strictly positive ({value})")]
    NonPositiveMass { index: usize, value: f64 },
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("point is not critical: |grad phi| = {residual:e} exceeds {tolerance:e}")]
    NotCritical { residual: f64, tolerance: f64 },
    #[error("parameter {value} outside admissible range ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("balancing mass solve failed: {0}")]
    MassSolveFailed(String),
    #[error("ring {ring} is not symmetric: radii vary by {spread:e}")]
    AsymmetricShape { ring: usize, spread: f64 },
    #[error("invalid masses: {0}")]
    InvalidMasses(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("row {row} is not a central configuration (residual {residual:e})")]
    NotCentral { row: usize, residual: f64 },
    #[error("orbit is degenerate (kernel dimension {kernel_dim})")]
    DegenerateOrbit { kernel_dim: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("evaluation failed at parameter {parameter}: {source}")]
    AtParameter {
        parameter: f64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, parameter: f64) -> Self {
        match self {
            e @ Error::AtParameter { .. } => e,
            e => Error::AtParameter {
                parameter,
                source: Box::new(e),
            },
        }
    }
}
