//! Robust linear optimization toolkit: exact per-radius solvers, proximal
//! point frontier generation, saddle-point oracles for uncertain constraints,
//! and Monte Carlo experiments on random polyhedra.
//!
//! The central objects are problems of the form
//!
//! ```text
//! min over x in D of  <a0, x> + alpha * sqrt(<x, Sigma x>)
//! ```
//!
//! whose minimizers trace the efficiency-robustness Pareto frontier as the
//! uncertainty radius `alpha` varies, and the proximal point trajectory
//!
//! ```text
//! x_{k+1} = argmin over D of  <a0, x> + lambda_k * <x - x_k, Sigma (x - x_k)>
//! ```
//!
//! started from the minimum-variance point, which reproduces that frontier in
//! a single sweep.

pub mod domains;
pub mod error;
pub mod frontier;
pub mod instances;
pub mod linalg;
pub mod portfolio;
pub mod ppm;
pub mod rng;
pub mod saddle;
pub mod sandwich;

mod barrier;
mod parallel;
mod pgd;

pub use error::{Error, Result};
pub use linalg::{Matrix, SpdMatrix, Vector};
