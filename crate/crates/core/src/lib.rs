//! Downlink cellular network simulator built on conditionally thinned
//! Poisson point processes.
//!
//! A typical user at the origin picks its nearest base station from a
//! Poisson layout of density `lambda`; every other station is then kept
//! independently with probability `p`. Small `p` pushes the user towards
//! the interior of its (new) cell. The crate provides:
//!
//! - [`geometry`]: point patterns, PPP sampling, thinning, nearest-neighbor
//!   queries and uniform sampling inside Voronoi cells.
//! - [`analytic`]: closed forms for the distance ratio `R = R2 / R1` and for
//!   the SIR coverage probability under Rayleigh fading.
//! - [`montecarlo`]: reproducible trial runners for the typical-user model
//!   and for the generative non-uniform user model.
//! - [`stats`]: empirical distributions, KS distances and Wilson intervals.
//!
//! Trials run on rayon when the `parallel` feature is enabled (the default)
//! and sequentially otherwise; results are identical either way.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
