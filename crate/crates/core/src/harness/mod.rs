//! Experiment driver: configuration, run output and table reproduction.

pub mod config;
pub mod output;
pub mod table;

pub use config::{ProblemKind, RunConfig};
pub use output::{run, snapshot, FieldKind, RunOutput, Snapshot};
pub use table::{reproduce_table, TableReport};
