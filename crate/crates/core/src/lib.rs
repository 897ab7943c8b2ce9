//! Numerical laboratory for disordered pinning models built on renewal processes.
//!
//! The crate is organised by subject:
//!
//! * [`renewal`]: gap laws, renewal mass sequences, tilts and decay-rate fits;
//! * [`pinning`]: disorder fields, log-domain partition functions, free-energy
//!   and `μ` estimators, correlation functions, exact Gibbs sampling;
//! * [`bessel`]: Bessel functions, the Bessel transition and hitting densities,
//!   the discretized hitting law and the decomposition of a gap law against it,
//!   bridge and excursion samplers;
//! * [`coupling`]: dressed renewal paths, pair coupling and good-block diagnostics.
//!
//! Every random quantity is driven by an explicit 64-bit seed (see [`seeds`]).

pub mod bessel;
pub mod coupling;
pub mod error;
pub mod numerics;
pub mod pinning;
pub mod renewal;
pub mod seeds;

pub use error::{Error, Result};
