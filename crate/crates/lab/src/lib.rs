//! Experiment runner for `planetlab-core`: TOML configs, CSV tables, SVG
//! figures and pass/fail summaries.
//!
//! Every experiment is deterministic. Randomness comes from one seed split
//! into independent ChaCha8 streams (see [`sampling::stream`]), and parallel
//! work is collected in index order, so the worker count never changes an
//! output byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod sampling;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig, ExperimentId};
pub use report::{Assertion, Outcome, Table};
