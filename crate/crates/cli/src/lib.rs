//! Batch front end for the Hunter-Saxton solvers: single runs, refinement
//! studies, scheme comparisons and mesh generation, all writing CSV.

pub mod commands;
pub mod error;
pub mod spec;

pub use commands::{cmd_compare, cmd_convergence, cmd_mesh, cmd_run, simulate};
pub use error::{CliError, Result};
pub use spec::{Emit, MeshSource, RunSpec};
