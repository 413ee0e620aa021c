//! Deterministic random streams keyed by `(seed, domain, id)`.
//!
//! Every consumer of randomness (permutation replicates, interval draws,
//! data generators, Monte-Carlo replicates) gets its own ChaCha stream, so
//! results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_SINGLE_PERMUTATION: u64 = 1;
pub const DOMAIN_INTERVALS: u64 = 2;
pub const DOMAIN_SIMULATION: u64 = 3;
pub const DOMAIN_LIMIT_PAIR_ARRAY: u64 = 4;
pub const DOMAIN_LIMIT_DATA: u64 = 5;
pub const DOMAIN_EXPERIMENT_DATA: u64 = 6;
pub const DOMAIN_EXPERIMENT_DETECT: u64 = 7;
const DOMAIN_WBS_NODE: u64 = 8;

/// Domain for the permutation replicates of the WBS node `(s, e)`.
pub fn wbs_node_domain(s: usize, e: usize) -> u64 {
    (DOMAIN_WBS_NODE << 56) ^ ((s as u64) << 28) ^ e as u64
}

pub fn substream(seed: u64, domain: u64, id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(id);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn derive_seed(seed: u64, domain: u64, id: u64) -> u64 {
    let mut z = seed
        .wrapping_add(domain.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(id.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
