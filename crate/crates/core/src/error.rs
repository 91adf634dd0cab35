use thiserror::Error;

/// Broad failure classes. The CLI maps each to its exit code and the C
/// interface to its status code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed config, out-of-range parameter, shape mismatch.
    Validation,
    /// The numerics broke down: NaN, non-convergent iteration.
    Numerical,
    /// A resolution, stiffness or memory guard refused the run.
    Guard,
    /// Filesystem or stream failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: L = {left_l}, M = {left_m} vs L = {right_l}, M = {right_m}")]
    GridMismatch {
        left_l: f64,
        left_m: usize,
        right_l: f64,
        right_m: usize,
    },

    #[error("free kernel is singular at t = 0")]
    SingularTime,

    #[error("state is not normalized (norm = {0:.12})")]
    NotNormalized(f64),

    #[error("inputs are not orthogonal (|<phi, phi_perp>| = {0:e})")]
    NotOrthogonal(f64),

    #[error("time {t} is not a node of the charge mesh (step {step}, {nodes} nodes)")]
    OffMesh { t: f64, step: f64, nodes: usize },

    #[error("bump width eps = {eps} is not resolved by grid spacing h = {h}: need eps >= {factor}*h = {}", factor * h)]
    UnresolvedBump { eps: f64, h: f64, factor: f64 },

    #[error("time step dt = {dt} exceeds the stiffness bound eps*h = {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("state needs {entries} amplitudes (M = {m}, N = {n}), above the budget of {budget}")]
    MemoryBudget {
        entries: u128,
        m: usize,
        n: usize,
        budget: u64,
    },

    #[error("charge iteration did not converge at node {node} (residual {residual:e}); the mesh step is too large")]
    NonConvergence { node: usize, residual: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("study property violated: {0}")]
    PropertyViolated(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error in {source_name}: {reason}")]
    Parse { source_name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::GridMismatch { .. }
            | Error::SingularTime
            | Error::NotNormalized(_)
            | Error::NotOrthogonal(_)
            | Error::OffMesh { .. }
            | Error::Config(_)
            | Error::Parse { .. } => ErrorKind::Validation,
            Error::UnresolvedBump { .. }
            | Error::StepTooLarge { .. }
            | Error::MemoryBudget { .. } => ErrorKind::Guard,
            Error::NonConvergence { .. } | Error::NonFinite(_) | Error::PropertyViolated(_) => {
                ErrorKind::Numerical
            }
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
