use thiserror::Error;

/// Errors shared across the crate. Validation failures are reported with
/// enough context (line numbers, offending simplices) to fix the input.
#[derive(Debug, Error)]
pub enum ReebError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("edge ({a},{b}) is shared by {count} triangles, expected 2 (closed manifold)")]
    NonManifoldEdge { a: usize, b: usize, count: usize },

    #[error("triangle {triangle} references vertex {vertex}, mesh has {vertex_count} vertices")]
    VertexIndexOutOfRange {
        triangle: usize,
        vertex: usize,
        vertex_count: usize,
    },

    #[error("edge ({a},{b}) has zero length")]
    DegenerateEdge { a: usize, b: usize },

    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    InvalidVertex { index: usize, count: usize },

    #[error("operation requires a connected mesh, got {components} components")]
    DisconnectedMesh { components: usize },

    #[error("axis must be nonzero")]
    ZeroAxis,

    #[error("field values must be pairwise distinct; call make_excellent first")]
    NonDistinctField,

    #[error("field value {value} is not finite at vertex {vertex}")]
    NonFiniteValue { vertex: usize, value: f64 },

    #[error("field has {got} values, mesh has {expected} vertices")]
    FieldLengthMismatch { got: usize, expected: usize },

    #[error(
        "perturbation infeasible at epsilon={epsilon:.3e}; minimal feasible epsilon is {min_epsilon:.3e}"
    )]
    PerturbationInfeasible { epsilon: f64, min_epsilon: f64 },

    #[error("level {t} outside field range [{lo}, {hi}]")]
    LevelOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("degenerate interval [{t0}, {t1}]")]
    DegenerateInterval { t0: f64, t1: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph point lies outside the graph: {0}")]
    PointNotOnGraph(String),

    #[error("mesh and graph do not match: {0}")]
    MismatchedInputs(String),

    #[error("gluing mismatch between blocks {lower} and {upper}: {message}")]
    GluingMismatch {
        lower: usize,
        upper: usize,
        message: String,
    },

    #[error("rejected thickened-graph spec: {0}")]
    RejectedSpec(String),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ReebError>;
