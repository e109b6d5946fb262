//! Deterministic seed derivation for parallel work.
//!
//! Replications and grid cells each get their own RNG seeded from a mix of
//! the experiment seed and the cell coordinates, so results are independent
//! of scheduling order and reproducible across runs.

/// One step of the splitmix64 generator; a cheap, well-mixed 64-bit hash.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a sequence of words (seed, condition index, replication index,
/// stream tag, ...) into a single seed.
pub fn mix(parts: &[u64]) -> u64 {
    let mut acc = 0x51_7c_c1_b7_27_22_0a_95u64;
    for &part in parts {
        acc = splitmix64(acc ^ part.wrapping_mul(0x2545_f491_4f6c_dd1d));
    }
    splitmix64(acc)
}
