use thiserror::Error;

pub type Result<T, E = ElasticError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ElasticError {
    #[error("curve is not regular at node {node}: speed {speed:e} <= {floor:e}")]
    Regularity { node: usize, speed: f64, floor: f64 },

    #[error("a curve needs at least 4 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid elastic parameters a={a}, b={b} (need a, b > 0 and 4b^2 >= a^2)")]
    InvalidParams { a: f64, b: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("topology mismatch: {0}")]
    Topology(String),

    #[error("lifted value at node {node} is off the cone (residual {residual:e})")]
    ConeViolation { node: usize, residual: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("node paths cross the cone apex at nodes {nodes:?}")]
    DegenerateInterior { nodes: Vec<usize> },

    #[error("explicit geodesic leaves the admissible region; maximal time is {t_max}")]
    ExistenceTimeExceeded { t_max: f64 },

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("constraint Newton solve diverged at step {step} (residual {residual:e})")]
    NewtonDivergence { step: usize, residual: f64 },

    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<crate::closed_space::LogOutcome>,
    },

    #[error("lifted curve is off the closure constraint (|F| = {residual:e})")]
    OffConstraint { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("diffeomorphism lost strict monotonicity at node {node}")]
    MonotonicityLost { node: usize },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
