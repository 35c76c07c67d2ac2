//! Experiment runner, trace and image formats, and comparison tables for
//! `rpdhg-core`.

pub mod args;
pub mod compare;
pub mod error;
pub mod image_io;
pub mod runner;
pub mod spec;
pub mod trace_io;

pub use error::{CliError, ExitCode};
pub use runner::{run, RunOutcome, WallClock};
pub use spec::{ProblemParams, RunSpec, SolverChoice, SolverSettings};
