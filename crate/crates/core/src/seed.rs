//! Per-cell seed derivation.
//!
//! A cell (repetition `rep`, context `context`, grid point `grid`) gets
//! `derive_seed(base, rep, context, grid)`: each coordinate is folded into
//! the state with a SplitMix64 finalizer, so cells can be run in any order
//! and reproduced on their own.

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, rep: u64, context: u64, grid: u64) -> u64 {
    let mut s = mix64(base);
    for x in [rep, context, grid] {
        s = mix64(s ^ mix64(x));
    }
    s
}
