//! Wasserstein-1 bounds on the non-Gaussianity of stable LTI outputs driven by
//! locally dependent, non-Gaussian noise, together with the Monte-Carlo
//! machinery used to check them.
//!
//! The pipeline is
//!
//! 1. [`lti`]: ARMA systems, characteristic roots, impulse responses and the
//!    dominant-pole envelope of `|G_i|`;
//! 2. [`noise`]: the MA-filtered input `u_t = Σ b_j w_{t-j}` and its moment
//!    and correlation structure;
//! 3. [`variance`]: the exact output variance and its case-specific lower bounds;
//! 4. [`stein`]: the local-dependence Stein bound and the assembled `f(α, t)`;
//! 5. [`wasserstein`]: exact one-dimensional `W₁` against the standard normal;
//! 6. [`harness`]: simulation, convergence studies and rate fits.

pub mod config;
pub mod error;
pub mod harness;
pub mod lti;
pub mod noise;
pub mod output;
pub mod rng;
pub mod stein;
pub mod variance;
pub mod wasserstein;

pub use error::{Error, Result};
