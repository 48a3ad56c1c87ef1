//! Experiment harness: configuration, case execution, sweeps, mesh
//! ladders, and checkpointing.
//!
//! Everything below is deterministic by construction: a given
//! configuration produces byte-identical CSV and plot output on every
//! run (wall-clock columns aside), and a run resumed from a checkpoint
//! finishes bitwise identical to one that never stopped.

mod case;
mod checkpoint;
mod config;
mod convergence;
mod plot;
mod sweep;

pub use case::{run_case, run_resume, CaseOutput};
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointData, FORMAT_VERSION};
pub use config::{CaseConfig, ConvergenceConfig, Overrides, ResolvedCase, RunConfig, VortexParams};
pub use convergence::{run_convergence, ConvergenceLevel, ConvergenceReport};
pub use sweep::{run_sweep, SweepRow};
