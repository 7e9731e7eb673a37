//! avgcycles — limit cycles of piecewise-cubic perturbations of a
//! quasi-homogeneous planar center, predicted by first-order averaging and
//! verified by direct return-map simulation.
//!
//! The unperturbed family is
//!
//! ```text
//! dx/dt = a·x² + b·y,        dy/dt = c·x³ + d·x·y,
//! ```
//!
//! a center at the origin whenever (d − 2a)² + 8bc < 0. The perturbation adds
//! ε·p(x, y), ε·q(x, y) with cubic polynomials p, q chosen independently on
//! the two sides of a switching line (x = 0 or y = 0).
//!
//! Pipeline:
//!
//! 1. [`problem`] — parse and validate a problem configuration.
//! 2. [`blowup`] — weighted polar transform (x = r·cosθ, y = r²·sinθ); the
//!    unperturbed flow factor r₀(θ; z) = ff(θ)·z, built once by adaptive
//!    quadrature ([`quad`]).
//! 3. [`averaging`] — the first-order averaged function h(z) = Σ k_{i,j}
//!    z^{i+2j}, one quadrature per perturbation slot.
//! 4. [`roots`] — positive simple zeros of h: each predicts one limit cycle.
//! 5. [`flowsim`] — independent verification by locating return-map fixed
//!    points of the perturbed flow near each predicted zero.
//!
//! The `avgcycles` binary wires the pipeline behind subcommands; see the
//! repository README.

// Tolerance guards are written `!(x > 0.0)` so that NaN is rejected along
// with nonpositive values; `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod blowup;
pub mod error;
pub mod flowsim;
pub mod parallel;
pub mod poly;
pub mod problem;
pub mod quad;
pub mod roots;

pub use error::{Error, Result};

/// Toolkit version, surfaced in run manifests and the FFI layer.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
