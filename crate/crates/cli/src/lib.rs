//! Command-line companion to `posegraph-core`: g2o file IO, the experiment
//! harness with CSV output, and data export for plotting.

#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod g2o;
