use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violated a domain constraint.
    #[error("invalid {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("evaluation failed at node {node}: {reason}")]
    Evaluation { node: usize, reason: String },

    #[error("gamma function has a pole at x = {0}")]
    GammaPole(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel pole at node {node} (tau = {tau}, t_obs = {t_obs})")]
    KernelPole { node: usize, tau: f64, t_obs: f64 },

    #[error("partial derivative check failed: {0}")]
    PartialMismatch(String),

    /// The solver produced a non-finite action or gradient. The offending
    /// iterate is attached for post-mortem inspection.
    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite {
        what: &'static str,
        iteration: usize,
        iterate: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}
