//! The Bessel auxiliary process: special functions, densities, the discretized
//! hitting law, decomposition of a gap law against it, and path samplers.

pub mod bridge;
pub mod c0;
pub mod density;
pub mod law;
pub mod sde;
pub mod special;

pub use bridge::{bridge_sample, bridge_step, BridgePath};
pub use c0::{estimate_c0, C0Point, C0Report};
pub use density::{hitting_density, transition_density, BesselSpec};
pub use law::{decompose_k, discretize_k_delta, Decomposition, HittingLaw};
pub use sde::{excursion_sample, simulate_hitting_times, Excursion, ExcursionSampler};
pub use special::{special_functions, BesselValues};
