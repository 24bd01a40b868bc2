//! Counter-based seed derivation.
//!
//! Sampling and the experiment harness derive an independent RNG for each
//! coordinate (seed, row), (seed, row, column), or (seed, cell, replicate),
//! so replicates can run in any order or in parallel and still reproduce
//! byte-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the coordinate parts into one 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x51ed_270b_a55e_d4f3u64;
    let mut acc = 0u64;
    for &p in parts {
        state ^= p;
        acc ^= splitmix64(&mut state);
    }
    // One extra round so trailing zeros still perturb the output.
    state ^= parts.len() as u64;
    acc ^ splitmix64(&mut state)
}

/// A ChaCha8 RNG whose full 256-bit seed is derived from the coordinate parts.
pub fn derived_rng(parts: &[u64]) -> ChaCha8Rng {
    let mut state = derive_seed(parts);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
