//! Error type shared across the solver and the experiment harness.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The characteristic foot point left the face-adjacent cells.
    #[error("CFL violation: |xi|*dt/2 = {shift:.6e} exceeds half cell width {half_dx:.6e}")]
    CflViolation { shift: f64, half_dx: f64 },

    /// Density dropped below the positivity floor; the run is aborted
    /// rather than clamped so the failure stays visible.
    #[error("non-physical field at {site}: density {rho:.6e} is below {floor:.1e}")]
    NonPhysicalField { site: String, rho: f64, floor: f64 },

    #[error("solver diverged at t = {time:.6e}: {detail}")]
    Diverged { time: f64, detail: String },

    #[error("degenerate comparison: analytic velocity norm vanishes at t = {t}")]
    DegenerateComparison { t: f64 },

    #[error("decay fit needs at least {required} samples spanning the half-decay time, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("decay fit sample {index} is not positive: {value}")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("sweep has no cases")]
    EmptySweep,

    #[error("not a checkpoint file: bad magic")]
    CheckpointMagic,

    #[error("checkpoint version mismatch: file has {found}, this build reads {expected}")]
    CheckpointVersion { found: u8, expected: u8 },

    #[error("checkpoint extent mismatch: {0}")]
    CheckpointExtent(String),

    #[error("checkpoint truncated: needed {needed} bytes, got {got}")]
    CheckpointTruncated { needed: u64, got: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool: 1 configuration,
    /// 2 solver failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::CflViolation { .. }
            | Error::DegenerateComparison { .. }
            | Error::InsufficientSamples { .. }
            | Error::EmptySweep => 1,
            Error::NonPhysicalField { .. }
            | Error::Diverged { .. }
            | Error::NonPositiveSample { .. } => 2,
            Error::CheckpointMagic
            | Error::CheckpointVersion { .. }
            | Error::CheckpointExtent(_)
            | Error::CheckpointTruncated { .. }
            | Error::Io { .. } => 3,
        }
    }
}
