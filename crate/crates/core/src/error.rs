use thiserror::Error;

pub type Result<T> = std::result::Result<T, SymError>;

/// Every failure the library can report.
///
/// [`SymError::name`] gives the stable kebab-case identifier that the CLI
/// prints in its error objects.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymError {
    #[error("matrix side {0} is not even")]
    OddDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerically singular matrix: {0}")]
    Singular(String),
    #[error("ambiguous eigenvalue classification near {eigenvalues:?}")]
    AmbiguousClassification { eigenvalues: Vec<(f64, f64)> },
    #[error("loop under-sampled on [{t0}, {t1}]: phase jump {jump:.3} rad")]
    Resolution { t0: f64, t1: f64, jump: f64 },
    #[error("endpoint lies on the Maslov cycle (smallest singular value {sigma:.3e})")]
    EndpointDegenerate { sigma: f64 },
    #[error("irregular crossing at t = {t}")]
    IrregularCrossing { t: f64 },
    #[error("extension path left its Sp* component: {0}")]
    Extension(String),
    #[error("spectral flow mismatch: crossing sum {crossing_sum}, endpoint count {endpoint_difference}")]
    SpectralFlowMismatch {
        crossing_sum: i64,
        endpoint_difference: i64,
    },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("loop is not Lagrangian-block at t = {t} (imaginary part {imag:.3e})")]
    NotLagrangian { t: f64, imag: f64 },
    #[error("gradient evaluation failed at {0:?}")]
    GradientFailure(Vec<f64>),
    #[error("integration step failed at t = {time}")]
    StepFailure { time: f64 },
    #[error("no periodic orbit found after {iterations} iterations (residual {residual:.3e})")]
    NoOrbitFound { iterations: usize, residual: f64 },
    #[error("boundary squared is nonzero at generator {witness}")]
    DSquaredNonzero { witness: String },
    #[error("boundary entry {from} -> {to} does not lower the degree by one")]
    DegreeRule { from: String, to: String },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator {0}")]
    DuplicateGenerator(String),
    #[error("boundary entry {from} -> {to} does not decrease the action")]
    ActionIncreasing { from: String, to: String },
    #[error("boundary entry {from} -> {to} does not lower the grading by one")]
    GradingMismatch { from: String, to: String },
    #[error("chain map is not a chain map: {0}")]
    NotChainMap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl SymError {
    pub fn name(&self) -> &'static str {
        match self {
            SymError::OddDimension(_) => "odd-dimension",
            SymError::DimensionMismatch { .. } => "dimension-mismatch",
            SymError::NotSymplectic { .. } => "not-symplectic",
            SymError::NotSymmetric { .. } => "not-symmetric",
            SymError::InvalidPath(_) => "invalid-path",
            SymError::Parameter(_) => "parameter",
            SymError::Singular(_) => "singular",
            SymError::AmbiguousClassification { .. } => "ambiguous-classification",
            SymError::Resolution { .. } => "resolution",
            SymError::EndpointDegenerate { .. } => "endpoint-degenerate",
            SymError::IrregularCrossing { .. } => "irregular-crossing",
            SymError::Extension(_) => "extension",
            SymError::SpectralFlowMismatch { .. } => "spectral-flow-mismatch",
            SymError::Convergence(_) => "convergence",
            SymError::NotLagrangian { .. } => "not-lagrangian",
            SymError::GradientFailure(_) => "gradient-failure",
            SymError::StepFailure { .. } => "step-failure",
            SymError::NoOrbitFound { .. } => "no-orbit-found",
            SymError::DSquaredNonzero { .. } => "d-squared-nonzero",
            SymError::DegreeRule { .. } => "degree-rule",
            SymError::UnknownGenerator(_) => "unknown-generator",
            SymError::DuplicateGenerator(_) => "duplicate-generator",
            SymError::ActionIncreasing { .. } => "action-increasing",
            SymError::GradingMismatch { .. } => "grading-mismatch",
            SymError::NotChainMap(_) => "not-chain-map",
            SymError::Unsupported(_) => "unsupported",
            SymError::Internal(_) => "internal",
            SymError::Parse(_) => "parse",
        }
    }
}
