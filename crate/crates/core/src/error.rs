use thiserror::Error;

/// Broad class of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad inputs: the request itself is malformed.
    Precondition,
    /// A numerical guard (aliasing, branch-cut leakage, step size) tripped.
    NumericalGuard,
    /// A statistical or physical consistency check failed.
    Statistical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("aliasing guard on {axis} axis: shift {shift:.6} is not below the Nyquist limit {limit:.6}")]
    Aliasing {
        axis: &'static str,
        shift: f64,
        limit: f64,
    },

    #[error("branch cut passes through non-negligible amplitude: leakage {leakage:.3e} exceeds {threshold:.1e}")]
    CutLeakage { leakage: f64, threshold: f64 },

    #[error("step {dt} does not resolve gate segment of length {segment} ({steps} < {min_steps} steps)")]
    UnresolvedGate {
        dt: f64,
        segment: f64,
        steps: usize,
        min_steps: usize,
    },

    #[error("splitting defect estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    TrotterDefect { estimate: f64, tolerance: f64 },

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("incompatible distributions: {0}")]
    Incompatible(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("histogram range [{lo}, {hi}) covers only {fraction:.4} of the samples (need >= 0.99)")]
    RangeCoverage { lo: f64, hi: f64, fraction: f64 },

    #[error("recombined packets do not interfere: visibility {visibility:.4} < 0.5 ({diagnostics})")]
    NoOverlap { visibility: f64, diagnostics: String },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidParameter { .. }
            | Error::Incompatible(_)
            | Error::EmptySamples
            | Error::RangeCoverage { .. } => ErrorCategory::Precondition,
            Error::Aliasing { .. }
            | Error::CutLeakage { .. }
            | Error::UnresolvedGate { .. }
            | Error::TrotterDefect { .. }
            | Error::DegenerateDistribution(_) => ErrorCategory::NumericalGuard,
            Error::NoOverlap { .. } => ErrorCategory::Statistical,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
