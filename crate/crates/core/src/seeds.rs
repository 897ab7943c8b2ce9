//! Deterministic seed splitting.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded from a 64-bit
//! value. Child seeds are derived from a parent seed and a stream index with
//! one SplitMix64 finalization round, so the seed used by replica `i` never
//! depends on how many other replicas exist or in which order they run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Human-readable name of the generator and splitting rule, recorded in run manifests.
pub const GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.9, seed_from_u64); child = splitmix64(parent + (stream + 1) * 0x9E3779B97F4A7C15)";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `stream` from `parent`.
pub fn derive(parent: u64, stream: u64) -> u64 {
    splitmix64(parent.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Derives a child seed from a signed label (e.g. a lattice site).
pub fn derive_signed(parent: u64, label: i64) -> u64 {
    derive(parent, label as u64)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
