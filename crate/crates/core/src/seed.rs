//! Deterministic seed derivation.
//!
//! All randomized components use ChaCha8 (portable, 64-bit seedable,
//! 256-bit state) seeded through the splitmix64 mixer, so a single
//! master seed reproduces every record bit for bit on any platform.

/// splitmix64 finalizer: one full avalanche step.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th child stream of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
