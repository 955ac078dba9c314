//! Configuration-driven experiments for the tunneling simulator: each
//! subcommand of `tunnel-arrival` is a function here that computes its
//! results and writes them as delimited tables.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
