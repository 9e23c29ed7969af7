use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid physical parameter, index set, or argument combination.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical routine produced or received something outside tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Requested system is larger than the dense representation supports.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The adaptive integrator could not take a step large enough to make progress.
    #[error("step size underflow at t = {time} (step {step:e})")]
    Stiffness { time: f64, step: f64 },

    /// The Liouvillian null space is not one-dimensional.
    #[error("steady state is not unique: second-smallest singular value {gap:e}")]
    Multiplicity { gap: f64 },

    /// A root-finding bracket does not straddle a sign change.
    #[error("bracket [{lo}, {hi}] does not straddle a crossing: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    /// A coarse scan found zero or several interior maxima where one was required.
    #[error("expected a single interior maximum, found local maxima at {maxima:?}")]
    Ambiguity { maxima: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
