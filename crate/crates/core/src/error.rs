use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    /// A flow reached or exceeded a line's saturation flow.
    #[error("flow {flow} is at or beyond the saturation flow {saturation}")]
    SaturatedFlow { flow: f64, saturation: f64 },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Demand outside `[0, total saturation flow)`.
    #[error("infeasible demand {demand}: must lie in [0, {capacity})")]
    InfeasibleDemand { demand: f64, capacity: f64 },

    /// Every line has zero effective frequency.
    #[error("degenerate network: no line has positive frequency")]
    DegenerateNetwork,

    /// The lines of a strategy have zero total frequency.
    #[error("degenerate strategy: total frequency is zero")]
    DegenerateStrategy,

    #[error("convergence failure: {0}")]
    ConvergenceError(String),

    /// Exponential enumeration guard.
    #[error("problem too large: n = {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid model or network parameters.
    #[error("invalid parameters: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
