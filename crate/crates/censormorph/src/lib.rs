//! Morphometric analysis of labeled cortical distance map (LCDM) data.
//!
//! LCDM data are signed distances (mm) of gray-matter voxels to the
//! gray/white matter surface. This crate pools per-subject distances by
//! diagnostic group, censors the pooled sample over a grid of thresholds
//! (keeping distances not exceeding each threshold), and runs a battery of
//! hypothesis tests at every step to localize where group differences occur.
//! A stacked-uniform distance generator and a Monte Carlo harness estimate
//! the empirical size and power of the whole procedure.
//!
//! Modules:
//! - [`lcdm`]: manifests, distance files, clipping, pooling
//! - [`censoring`]: the threshold schedule and prefix views
//! - [`stats`]: the test battery and its tail-probability numerics
//! - [`kde`]: Gaussian kernel density estimation
//! - [`simulator`]: the stacked-uniform distance generator
//! - [`harness`]: empirical size/power curves with confidence bands
//! - [`cli`]: the command-line front end (analyze, simulate, mc, kde)
//!
//! The `examples/` directory shows one runnable program per capability.

pub mod censoring;
pub mod cli;
pub mod error;
pub mod harness;
pub mod kde;
pub mod lcdm;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
