use thiserror::Error;

/// Failure modes shared by the constructive solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    /// A checked invariant failed. Always a bug in the solver, never a
    /// property of the input.
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
}
