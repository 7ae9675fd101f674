//! Multiscale similarity testing for the drift of a scalar ergodic diffusion
//! observed continuously.
//!
//! The crate simulates diffusion and fractional-diffusion paths, evaluates the
//! pathwise multiscale statistic with its similarity allowance and multiscale
//! correction, estimates the test quantiles by Monte Carlo, reports detected
//! and minimal deviation intervals, and constructs least-favourable
//! alternatives through a fixed-point solve on the invariant density.
//!
//! Modules map onto the main stages of the pipeline:
//!
//! - [`kernels`]: kernel families, rescaling, norms and the optimal-recovery
//!   constant.
//! - [`sde`]: drift specifications, invariant densities with certified bounds,
//!   stationary sampling and Euler-Maruyama simulation.
//! - [`multiscale`]: the local statistics, the supremum statistic over a
//!   location/bandwidth grid, detection sets and minimal intervals.
//! - [`quantiles`]: Monte-Carlo simulation of the limiting statistics and
//!   quantile extraction.
//! - [`fbm`]: hypergeometric evaluation, the Volterra kernel, fractional
//!   Brownian motion and the common-noise stability experiment.
//! - [`lower_bound`]: least-favourable alternatives via the fixed-point
//!   construction.
//! - [`io`]: CSV/JSON serialization of the domain types.

// Guards written as `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fbm;
pub mod io;
pub mod kernels;
pub mod lower_bound;
pub mod multiscale;
pub mod quantiles;
pub mod rng;
pub mod sde;

pub use error::{Error, Result};
