//! Experiment harness behind the `longsink` binary: direction surveys, the
//! flip-family experiment, and SVG snapshot export.

pub mod export;
pub mod survey;

/// splitmix64 step; derives independent per-index seed streams so parallel
/// evaluation is order-independent yet deterministic.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut x = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
