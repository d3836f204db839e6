use thiserror::Error;

/// Mesh construction and deformation failures.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("inner boundary is not star shaped about ({cx}, {cy}): ray angle reverses near vertex {vertex}")]
    StarShapeViolation { cx: f64, cy: f64, vertex: usize },

    #[error("inner boundary reaches or crosses the outer circle (clearance {clearance:.3e} along ray {ray})")]
    GeometryOverlap { clearance: f64, ray: usize },

    #[error("boundary edge {edge} shorter than {min_len:.3e}")]
    DegenerateEdge { edge: usize, min_len: f64 },

    #[error("triangle {tri} has non positive signed area {area:.3e}")]
    DegenerateTriangle { tri: usize, area: f64 },

    #[error("displacement inverts triangle {tri} (signed area {area:.3e})")]
    MeshInversion { tri: usize, area: f64 },

    #[error("polyline needs at least 3 vertices, got {got}")]
    EmptyPolyline { got: usize },

    #[error("bad mesh file: {0}")]
    BadFile(String),
}

/// Assembly and linear solve failures.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("system factorization failed: matrix numerically singular")]
    SingularSystem,

    #[error("solve residual {residual:.3e} exceeds {limit:.3e} after refinement")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("Dirichlet node list does not match tagged boundary nodes")]
    DirichletMismatch,
}

/// Descent loop failures.
#[derive(Debug, Error)]
pub enum DescentError {
    #[error("step size collapsed after {halvings} halvings at iteration {iter} (last t {t:.3e})")]
    StepCollapse { iter: usize, halvings: usize, t: f64 },

    #[error("iteration {iter}: {source}")]
    Mesh {
        iter: usize,
        #[source]
        source: MeshError,
    },

    #[error("iteration {iter}: {source}")]
    Solve {
        iter: usize,
        #[source]
        source: SolveError,
    },
}

/// Scenario configuration and IO failures.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("radii must satisfy 0 < r < R, got r={r}, R={big_r}")]
    BadRadii { r: f64, big_r: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config line {line}: {msg}")]
    BadConfig { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error(transparent)]
    Solve(#[from] SolveError),

    #[error(transparent)]
    Descent(#[from] DescentError),
}

impl ScenarioError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        ScenarioError::Io { path: path.into(), source }
    }
}
