use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seedable, splittable random stream.
///
/// A substream depends only on the parent's key and the requested index,
/// never on how many values the parent has already produced, so trial `i`
/// of a campaign draws the same numbers whether trials run in order, out of
/// order, or on different threads.
#[derive(Clone, Debug)]
pub struct RandomStream {
    key: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        let key = splitmix64(seed);
        RandomStream { key, rng: ChaCha8Rng::seed_from_u64(key) }
    }

    /// Independent child stream number `index`.
    pub fn substream(&self, index: u64) -> RandomStream {
        let key = splitmix64(self.key ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03));
        RandomStream { key, rng: ChaCha8Rng::seed_from_u64(key) }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_ignore_parent_position() {
        let a = RandomStream::from_seed(7);
        let mut b = RandomStream::from_seed(7);
        for _ in 0..10 {
            b.next_u64();
        }
        let mut sa = a.substream(3);
        let mut sb = b.substream(3);
        for _ in 0..5 {
            assert_eq!(sa.next_u64(), sb.next_u64());
        }
    }

    #[test]
    fn distinct_indices_and_seeds_differ() {
        let root = RandomStream::from_seed(1);
        let x = root.substream(0).next_u64();
        assert_ne!(x, root.substream(1).next_u64());
        assert_ne!(x, RandomStream::from_seed(2).substream(0).next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RandomStream::from_seed(0);
        let mean = (0..10_000).map(|_| r.uniform()).inspect(|u| assert!((0.0..1.0).contains(u))).sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02);
    }
}
