use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed its basic validity check (wrong range, wrong sign).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A value lies outside the mathematical domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are individually valid but the combination is not handled.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// Floating-point evaluation lost too much precision to trust the result.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// The Markov chain has more than one recurrent class.
    #[error("non-ergodic chain: {0}")]
    NonErgodic(String),

    /// An iterative solver ran out of iterations.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// An empirical estimate was requested from a run that produced no events.
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    /// Two values that must describe the same configuration do not.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
