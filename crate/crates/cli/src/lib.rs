//! Scenario runner and file formats for `chiral-qed`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod noise;
pub mod runner;

pub use config::Scenario;
pub use error::CliError;
pub use noise::synthesize_noisy;
pub use runner::{run_file, run_scenario};
