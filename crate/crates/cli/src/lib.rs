//! Configuration, run orchestration and CSV output for the
//! `driven-lindblad` command.

pub mod config;
pub mod run;
pub mod sweep;

pub use config::{ConfigError, Engine, RawConfig, RunConfig};
pub use run::{check_validity, render_csv, simulate, Row, RunError, RunOutput};
pub use sweep::{sweep, SweepPlan, SweepRun};
