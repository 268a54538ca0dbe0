use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Identifier of the underlying generator, recorded in reports.
pub const ALGORITHM: &str = "chacha8";

/// Seeded, splittable random source.
///
/// A generator is identified by `(seed, stream)`; identical pairs produce
/// identical sequences. Child generators get deterministic stream ids so
/// parallel chunks never share a sequence.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent generator for sub-task `label`, determined by
    /// `(seed, stream, label)` only.
    pub fn child(&self, label: u64) -> Rng {
        let s = splitmix64(splitmix64(self.stream ^ 0xa076_1d64_78bd_642f).wrapping_add(label));
        Rng::with_stream(self.seed, s)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.inner.random_range(lo..=hi)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::with_stream(7, 3);
        let mut b = Rng::with_stream(7, 3);
        for _ in 0..10 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn children_differ() {
        let r = Rng::new(1);
        let mut a = r.child(0);
        let mut b = r.child(1);
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(r.child(5).next_u64(), r.child(5).next_u64());
    }
}
