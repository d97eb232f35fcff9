//! Pairwise-independent hash families for bucket assignment and
//! fingerprinting.
//!
//! Both families are multiply-add-shift: `h(x) = (a*x + b) >> (128 - bits)`
//! with 128-bit odd `a` and 128-bit `b`, which is strongly universal on
//! 64-bit keys. All randomness flows from a single injectable 64-bit seed so
//! that every structure in the crate replays identically for a fixed seed.

use crate::ElementKey;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic stream of hash-function parameters derived from one seed.
///
/// Structures draw fresh functions from the stream on construction and on
/// rebuild, so a rebuild changes the hash functions but the whole run is
/// still a pure function of the seed.
#[derive(Debug, Clone)]
pub struct SeedStream {
    rng: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }

    fn next_u128(&mut self) -> u128 {
        (self.rng.gen::<u64>() as u128) << 64 | self.rng.gen::<u64>() as u128
    }

    /// An independent stream, for substructures with their own rebuild
    /// schedules.
    pub fn fork(&mut self) -> SeedStream {
        SeedStream::new(self.next_u64())
    }

    pub fn bucket_hash(&mut self, num_buckets: usize) -> BucketHash {
        BucketHash {
            mul: self.next_u128() | 1,
            add: self.next_u128(),
            num_buckets: num_buckets as u64,
        }
    }

    pub fn fingerprint_hash(&mut self, bits: u32) -> FingerprintHash {
        FingerprintHash { mul: self.next_u128() | 1, add: self.next_u128(), bits }
    }
}

/// Hash onto bucket indices `[0, num_buckets)`.
#[derive(Debug, Clone)]
pub struct BucketHash {
    mul: u128,
    add: u128,
    num_buckets: u64,
}

impl BucketHash {
    pub fn bucket_of(&self, e: ElementKey) -> usize {
        let h = (self.mul.wrapping_mul(e.0 as u128).wrapping_add(self.add) >> 96) as u64;
        // Map the 32-bit hash onto [0, num_buckets) by fixed-point scaling.
        ((h * self.num_buckets) >> 32) as usize
    }

    pub fn num_buckets(&self) -> usize {
        self.num_buckets as usize
    }
}

/// Hash onto fingerprints `[0, 2^bits)` with `2^bits = w^2`.
#[derive(Debug, Clone)]
pub struct FingerprintHash {
    mul: u128,
    add: u128,
    bits: u32,
}

impl FingerprintHash {
    pub fn fingerprint_of(&self, e: ElementKey) -> u64 {
        (self.mul.wrapping_mul(e.0 as u128).wrapping_add(self.add) >> (128 - self.bits)) as u64
    }

    /// Size of the fingerprint range.
    pub fn range(&self) -> u64 {
        1u64 << self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize, seed: u64) -> Vec<ElementKey> {
        let mut s = SeedStream::new(seed);
        (0..n).map(|_| ElementKey(s.next_u64())).collect()
    }

    #[test]
    fn single_bucket_is_always_zero() {
        let mut s = SeedStream::new(7);
        let h = s.bucket_hash(1);
        for k in keys(100, 1) {
            assert_eq!(h.bucket_of(k), 0);
        }
    }

    #[test]
    fn bucket_hash_is_deterministic_and_in_range() {
        let mut s1 = SeedStream::new(42);
        let mut s2 = SeedStream::new(42);
        let h1 = s1.bucket_hash(48);
        let h2 = s2.bucket_hash(48);
        for k in keys(1000, 2) {
            let b = h1.bucket_of(k);
            assert_eq!(b, h2.bucket_of(k));
            assert!(b < 48);
        }
    }

    #[test]
    fn bucket_loads_are_balanced() {
        let mut s = SeedStream::new(0xb0b);
        let h = s.bucket_hash(16);
        let mut loads = [0u64; 16];
        for k in keys(100_000, 3) {
            loads[h.bucket_of(k)] += 1;
        }
        let mean = 100_000u64 / 16;
        let max = *loads.iter().max().unwrap();
        assert!(max <= 3 * mean, "max load {max} vs mean {mean}");
    }

    #[test]
    fn fingerprint_fits_value_bits() {
        let mut s = SeedStream::new(5);
        let h = s.fingerprint_hash(12);
        assert_eq!(h.range(), 4096);
        for k in keys(10_000, 4) {
            assert!(h.fingerprint_of(k) < 4096);
        }
    }

    #[test]
    fn fingerprint_collision_rate_is_pairwise() {
        // Binomial(10^6, 1/4096): mean ~244, sigma ~15.6; assert within 3 sigma.
        let mut s = SeedStream::new(99);
        let h = s.fingerprint_hash(12);
        let pairs = 1_000_000usize;
        let ks = keys(2 * pairs, 6);
        let mut collisions = 0u64;
        for c in ks.chunks_exact(2) {
            if c[0] != c[1] && h.fingerprint_of(c[0]) == h.fingerprint_of(c[1]) {
                collisions += 1;
            }
        }
        let mean = pairs as f64 / 4096.0;
        let sigma = (pairs as f64 * (1.0 / 4096.0) * (1.0 - 1.0 / 4096.0)).sqrt();
        let lo = (mean - 3.0 * sigma) as u64;
        let hi = (mean + 3.0 * sigma) as u64;
        assert!(
            (lo..=hi).contains(&collisions),
            "collision count {collisions} outside [{lo}, {hi}]"
        );
    }
}
