use thiserror::Error;

#[derive(Debug, Error)]
pub enum FracError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("field length {found} does not match grid size {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("field contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error(
        "fixed-point iteration is not contracting on [{t0}, {t1}]: update grew from {previous:e} to {current:e} at iteration {iteration}"
    )]
    NonContraction {
        t0: f64,
        t1: f64,
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("fixed-point iteration did not reach {tol:e} within {iterations} iterations (last update {last:e})")]
    FixedPointNotConverged {
        iterations: usize,
        tol: f64,
        last: f64,
    },

    #[error("kernel quadrature needs xi_max = {required:.3e}, above the hard cap {cap:.3e} (alpha too close to 0?)")]
    XiMaxExceeded { required: f64, cap: f64 },

    #[error("flux `{label}` is not convex on [{lo}, {hi}]")]
    NonConvexFlux { label: String, lo: f64, hi: f64 },

    #[error("Newton iteration stagnated after {iterations} iterations, residual {residual:e}")]
    NewtonStagnation { iterations: usize, residual: f64 },

    #[error("converged profile is not monotone at index {index} (window too small?)")]
    NonMonotoneProfile { index: usize },

    #[error("insufficient {side} tail: {detail}")]
    InsufficientTail { side: &'static str, detail: String },

    #[error("grid under-resolves the viscous layer: dx = {dx:e}, need dx <= {required_dx:e}")]
    UnderResolved { dx: f64, required_dx: f64 },

    #[error("far-field pads differ ({left_u}, {right_u}) vs ({left_v}, {right_v}); L1 distance is not summable")]
    PadMismatch {
        left_u: f64,
        right_u: f64,
        left_v: f64,
        right_v: f64,
    },

    #[error("test function support touches the domain boundary: {0}")]
    SupportTouchesBoundary(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

impl FracError {
    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        FracError::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        FracError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
