//! Deterministic randomness.
//!
//! Every random draw in the toolkit comes from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Uniform reals are the top 53 bits of a draw
//! scaled into `[0, 1)`. Per-image and per-phase seeds are derived from one master seed
//! with [`derive_seed`].

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Name recorded in model and report metadata.
pub const PRNG_NAME: &str = "xoshiro256**/splitmix64";

/// Seeded generator used throughout the crate.
#[derive(Debug, Clone)]
pub struct Prng(Xoshiro256StarStar);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be non-zero.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        // Lemire's multiply-shift; bias is below 2^-32 for the sizes used here.
        ((self.0.next_u64() >> 32).wrapping_mul(n as u64) >> 32) as usize
    }
}

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_iter(bytes.iter().copied())
}

fn fnv1a_iter(bytes: impl Iterator<Item = u8>) -> u64 {
    bytes.fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for `(phase, id)` under a master seed:
/// `mix64(master ^ mix64(fnv1a(phase ++ 0x00 ++ id)))`.
pub fn derive_seed(master: u64, phase: &str, id: &str) -> u64 {
    let h = fnv1a_iter(phase.bytes().chain([0u8]).chain(id.bytes()));
    mix64(master ^ mix64(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = Prng::new(7);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Prng::new(99);
        let mut b = Prng::new(99);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derived_seeds_separate_phases_and_ids() {
        let s = derive_seed(1, "calibration", "a.pgm");
        assert_eq!(s, derive_seed(1, "calibration", "a.pgm"));
        assert_ne!(s, derive_seed(1, "stego", "a.pgm"));
        assert_ne!(s, derive_seed(1, "calibration", "b.pgm"));
        assert_ne!(s, derive_seed(2, "calibration", "a.pgm"));
        // the separator keeps ("ab","c") and ("a","bc") apart
        assert_ne!(derive_seed(0, "ab", "c"), derive_seed(0, "a", "bc"));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = Prng::new(3);
        for n in 1..50 {
            assert!(rng.below(n) < n);
        }
    }
}
