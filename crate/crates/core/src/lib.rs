//! Sum-of-Gaussians approximation of the bounded Gauss integral
//! `P(t) = erf(t / sqrt(2))`.
//!
//! `P(t)^2` is approximated by `1 - sum_n w_n exp(-k_n^2 t^2 / 2)`, where the
//! widths `k_n` are confined to chained intervals `[1/cos(pi n/4N), 1/cos(pi (n+1)/4N)]`
//! obtained by repeatedly rotating the square `[-t, t]^2`.
//!
//! Modules:
//! - [`oracle`]: reference `P(t)` accurate to 1e-14.
//! - [`geometry`]: binary and ternary bound tables.
//! - [`approx`]: the approximations, envelopes and Shenton-type bounds.
//! - [`fit`]: node-equation, random-search and upper-boundary parameter choices.
//! - [`analysis`]: sup-norm errors, convergence tables, the `H(t)/N` identity, timing.
//! - [`continuum`]: the `N -> infinity` angular integral and its power series.
//! - [`paramfile`]: the versioned JSON parameter file used by the CLI.

pub mod analysis;
pub mod approx;
pub mod continuum;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod oracle;
pub mod paramfile;
pub mod quad;
pub mod search;

pub use approx::{p_approx, p_leading, ParameterSet};
pub use error::{Error, Result};
pub use geometry::{bounds, validate, BoundTable, Interval, Scheme};
pub use oracle::{p_exact, Probability};
