//! Seed derivation.
//!
//! Every random stream in the pipeline is a ChaCha8 generator keyed by
//! `(master_seed, component, index)`. Streams never share state, so results do
//! not depend on the order in which images are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Component identifiers mixed into derived seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Scene = 1,
    Background = 2,
    RegionPerturbation = 10,
    FaithfulnessCorrelation = 11,
    FaithfulnessEstimate = 12,
    Infidelity = 13,
    Premise = 20,
}

pub fn stream_rng(master_seed: u64, component: Component, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(component as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A single `u64` seed for `(master_seed, component, index)`.
pub fn derive_seed(master_seed: u64, component: Component, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(master_seed, component, index).next_u64()
}
