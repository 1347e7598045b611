//! Numerical laboratory for parabolic nonlocal equations `u_t - Iu = f`.
//!
//! The operators `I` are integro-differential operators elliptic with respect
//! to kernel classes comparable to the fractional Laplacian of order
//! `sigma in (0,2)`. The crate provides:
//!
//! * kernel families and membership checks ([`kernel`]),
//! * fields on space-time grids with exterior tail models ([`field`]),
//! * singular quadrature for linear, extremal (Pucci) and inf-sup operators
//!   ([`quad`], [`eval`]),
//! * a monotone explicit Dirichlet solver with comparison-principle guarantees
//!   ([`evolve`]),
//! * barrier verification and boundary modulus composition ([`barrier`],
//!   [`modulus`]),
//! * regularity measurements: Holder seminorms, flatness sequences, the
//!   time-regularity bound and its jump counterexample ([`regularity`]),
//! * operator norms over test-function banks, rescaling, weak convergence and
//!   coefficient-perturbation experiments ([`metrics`]),
//! * a reproducible experiment runner with config files and manifests
//!   ([`config`], [`experiments`]).

pub mod barrier;
pub mod config;
pub mod error;
pub mod eval;
pub mod evolve;
pub mod experiments;
pub mod field;
pub mod kernel;
pub mod metrics;
pub mod modulus;
pub mod quad;
pub mod regularity;
pub mod util;

pub use error::{Error, Result};
