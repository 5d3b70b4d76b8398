use core::fmt;

/// Errors returned by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside its documented domain.
    InvalidArgument(&'static str),
    /// An iterative solver stopped before meeting its tolerance.
    /// `lo` and `hi` bracket the last known position of the root.
    NonConvergence { lo: f64, hi: f64 },
    /// A linear system was singular to working precision.
    Singular,
    /// No design exists for the requested target.
    Infeasible(&'static str),
    /// Sample statistics could not be formed (e.g. a singular covariance).
    DegenerateData(&'static str),
    /// A simulated run exceeded the configured run-length cap.
    Overflow { replication: u64, cap: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonConvergence { lo, hi } => {
                write!(f, "solver did not converge; root bracketed in [{lo:e}, {hi:e}]")
            }
            Error::Singular => f.write_str("singular linear system"),
            Error::Infeasible(msg) => write!(f, "infeasible design: {msg}"),
            Error::DegenerateData(msg) => write!(f, "degenerate data: {msg}"),
            Error::Overflow { replication, cap } => {
                write!(f, "replication {replication} exceeded the run-length cap of {cap}")
            }
        }
    }
}

impl core::error::Error for Error {}
