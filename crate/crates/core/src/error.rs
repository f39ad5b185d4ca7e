//! Error types shared across the crate.

use thiserror::Error;

/// Failures raised while building cell geometries, meshes and layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("geometry touches the top/bottom boundary: {0}")]
    TouchesTopBottom(String),
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("invalid geometry parameters: {0}")]
    InvalidParameters(String),
    #[error("meshing failed: {0}")]
    MeshingFailed(String),
    #[error("mesh is empty")]
    EmptyMesh,
    #[error("(b - a)/eps = {0} is not an integer")]
    NonintegerCellCount(f64),
    #[error("boundary part is empty: {0}")]
    EmptyBoundaryPart(String),
    #[error("boundary edge ({0}, {1}) could not be tagged")]
    UntaggedEdge(usize, usize),
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
}

/// Failures raised by linear solvers and eigen-decompositions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite (curvature {0:.3e})")]
    IndefiniteDetected(f64),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Failures raised by finite-element assembly and integration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("form `{form}` is not compatible with a {space} space")]
    IncompatibleSpaceForm { form: String, space: String },
    #[error("integration region is empty: {0}")]
    RegionEmpty(String),
}

/// Failures raised by the material tensor.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("elasticity tensor is not symmetric (defect {0:.3e})")]
    NotSymmetric(f64),
    #[error("elasticity tensor is not coercive (min Voigt eigenvalue {0:.3e})")]
    NotCoercive(f64),
}

/// Failures raised while validating coefficients and identities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("positivity violated: {0}")]
    PositivityViolation(String),
    #[error("duality identity violated: {0}")]
    DualityViolation(String),
    #[error("cell solutions were computed on a different mesh")]
    MismatchedMesh,
    #[error("alpha_h is not positive ({0:.3e})")]
    NonpositiveAlpha(f64),
    #[error("missing cell solutions: {0}")]
    MissingCellSolutions(String),
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
    #[error("compatibility violated: reduced forcing at t = 0 has norm {0:.3e}")]
    CompatibilityViolated(f64),
    #[error("discrete energy increased on load-free step {step}: {before:.6e} -> {after:.6e}")]
    EnergyIncrease { step: usize, before: f64, after: f64 },
    #[error("Galerkin basis deficient: requested {requested}, available {available}")]
    BasisDeficient { requested: usize, available: usize },
}

/// Failures raised by configuration handling.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("epsilon list is not strictly decreasing: {0:?}")]
    NotDecreasing(Vec<f64>),
}

/// Top-level error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code associated with this error: 3 for input errors,
    /// 4 for solver failures, 2 for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver(_) => 4,
            Error::Check(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
