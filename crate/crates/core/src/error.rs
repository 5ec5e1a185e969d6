use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("atom count must be at least {min}, got {got}")]
    AtomCount { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("matrix is not parity symmetric (max deviation {0:e})")]
    NotParitySymmetric(f64),

    #[error("even-parity levels are degenerate at omega = {omega}")]
    DegenerateGap { omega: f64 },

    #[error("sweep rate diverges: coupling {coupling:e} is below threshold")]
    RateDivergence { coupling: f64 },

    #[error("sweep did not reach omega = {target} before t = {max_time}")]
    SweepTimeout { target: f64, max_time: f64 },

    #[error("time grid is not strictly increasing at sample {index}")]
    NonMonotonicTime { index: usize },

    #[error("step refinement did not converge (last change {change:e})")]
    NotConverged { change: f64 },

    #[error("quantum Fisher information is zero: phase precision is unbounded")]
    UnboundedPrecision,

    #[error("fidelity floor {floor} unreachable up to T = {t_max} (best {best})")]
    FloorUnreachable { floor: f64, t_max: f64, best: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
