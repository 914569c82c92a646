//! Parameter sweeps over the routing model with deterministic CSV/JSON
//! output, and the `qrouter` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod manifest;
pub mod runs;
pub mod table;

pub use config::SweepSpec;
pub use error::{ConfigError, RunError};
