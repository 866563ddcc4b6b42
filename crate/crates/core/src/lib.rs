//! Bias diagnostics for heteroscedastic linear regression.
//!
//! OLS residuals are orthogonal to the regressors by construction, so they
//! cannot reveal disturbance-regressor correlation. Median (LAD) regression
//! residuals can: under heteroscedasticity, omitted variables, measurement
//! error, and simultaneity each leave a nonzero correlation between a
//! regressor and the LAD residuals. This crate computes that correlation,
//! Fisher-transforms it, calibrates it by pairs bootstrap, and ships a Monte
//! Carlo engine that reproduces the published simulation grids plus a CLI
//! for running the diagnostic on CSV data.
//!
//! Module map:
//! - [`numerics`]: seeded splittable RNG, dense matrices, pivoted QR.
//! - [`regression`]: OLS with Newey-West HAC errors, Breusch-Pagan test.
//! - [`lad`]: smoothed-IRLS median regression plus an exact oracle.
//! - [`biastest`]: the residual-correlation statistic and its bootstrap.
//! - [`simulate`]: data-generating processes and the replication engine.
//! - [`cli`]: CSV ingestion, pipeline orchestration, report rendering.

pub mod biastest;
pub mod cli;
pub mod error;
pub mod lad;
pub mod numerics;
pub mod regression;
pub mod simulate;

pub use error::{Error, Result};
