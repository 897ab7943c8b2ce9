//! The disordered pinning model on finite windows.

pub mod blocks;
pub mod correlation;
pub mod disorder;
pub mod estimators;
pub mod gibbs;
pub mod partition;

pub use blocks::{omega_blocks, OmegaBlocks};
pub use correlation::{correlation_length, two_point, TwoPointSeries};
pub use disorder::{sample_disorder, DisorderField, DisorderLaw, PinningParams};
pub use estimators::{free_energy_estimate, mu_estimate, replica_log_partitions, Estimate, ReplicaSet};
pub use gibbs::{contact_fraction, sample_gibbs, GibbsWindow};
pub use partition::{homogeneous_free_energy, log_partition, PartitionTable, WindowModel};
