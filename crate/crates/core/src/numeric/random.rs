use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::Matrix;
use crate::error::{Error, Result};

/// Seeded random stream backed by ChaCha8.
///
/// The 64-bit seed is expanded to a ChaCha key with `seed_from_u64`
/// (PCG32-based and fixed by `rand_core`), and independent sub-streams use
/// ChaCha's native stream id. ChaCha output is defined byte-for-byte, so a
/// given `(seed, stream)` yields the same sequence on every platform.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomStream { seed, rng }
    }

    /// A fresh stream with the same seed and a different stream id.
    pub fn fork(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (rejection sampling, no modulo bias).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Matrix of i.i.d. uniform draws in `[lo, hi)`, filled in row-major order.
pub fn rand_uniform(stream: &mut RandomStream, rows: usize, cols: usize, lo: f64, hi: f64) -> Result<Matrix> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("rand_uniform needs lo < hi, got [{lo}, {hi})")));
    }
    let width = hi - lo;
    let data = (0..rows * cols)
        .map(|_| {
            let v = lo + width * stream.next_f64();
            // Rounding can land exactly on `hi` for wide ranges.
            if v >= hi {
                f64::from_bits(hi.to_bits() - 1).max(lo)
            } else {
                v
            }
        })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = rand_uniform(&mut RandomStream::new(7), 4, 5, 0.0, 1.0).unwrap();
        let b = rand_uniform(&mut RandomStream::new(7), 4, 5, 0.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn different_seeds_differ() {
        let a = rand_uniform(&mut RandomStream::new(1), 3, 3, 0.0, 1.0).unwrap();
        let b = rand_uniform(&mut RandomStream::new(2), 3, 3, 0.0, 1.0).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn streams_are_independent_of_draw_history() {
        let mut a = RandomStream::new(5);
        let _ = a.next_u64();
        let mut f1 = a.fork(3);
        let mut f2 = RandomStream::with_stream(5, 3);
        assert_eq!(f1.next_u64(), f2.next_u64());
    }

    #[test]
    fn empty_range_is_rejected() {
        assert!(rand_uniform(&mut RandomStream::new(0), 1, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = RandomStream::new(9);
        let mut seen = [false; 3];
        for _ in 0..200 {
            seen[s.below(3)] = true;
        }
        assert!(seen.iter().all(|x| *x));
    }
}
