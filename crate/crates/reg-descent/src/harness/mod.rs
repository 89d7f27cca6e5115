//! File-driven experiment harness: config parsing, orchestration, and
//! deterministic CSV/SVG artifact emission.  The CLI binary is a thin
//! wrapper over [`runner`].

pub mod config;
pub mod csv;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig, ProblemSpec, SweepSpec};
pub use runner::{
    cli_oracle, cli_run, cli_sweep, cli_validate, init_thread_pool, HarnessError, Overrides,
    EXIT_ALL_DIVERGED, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_ORACLE_CAP,
};
