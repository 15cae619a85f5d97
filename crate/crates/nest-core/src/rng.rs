//! Deterministic seed derivation for independent RNG streams.
//!
//! Every stochastic component (shot trajectories, parameter inits,
//! synthetic noise fields) seeds its own ChaCha stream from a splitmix
//! hash of (base seed, salt words), so parallel and sequential execution
//! consume identical randomness.

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive(base: u64, salts: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &s in salts {
        h = splitmix64(h ^ s);
    }
    h
}

/// Stable 64-bit hash for short strings (Pauli labels, stream names).
pub(crate) fn str_salt(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
