//! Deterministic pseudo-random numbers.
//!
//! [`SeededRng`] is SplitMix64: the 64-bit state advances by the constant
//! `0x9E3779B97F4A7C15` and each output is the state passed through the
//! SplitMix64 finalizer (`x ^= x >> 30; x *= 0xBF58476D1CE4E5B9; x ^= x >> 27;
//! x *= 0x94D049BB133111EB; x ^= x >> 31`). Only wrapping integer arithmetic is
//! involved, so sequences are identical on every platform.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededRng {
    state: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` without modulo bias. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        // Lemire's multiply-shift with rejection of the biased low zone.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Uniform in the open interval `(lo, hi)`; requires `lo < hi`.
    pub fn open_interval(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo < hi);
        for _ in 0..64 {
            let v = lo + (hi - lo) * self.next_f64();
            if v > lo && v < hi {
                return v;
            }
        }
        // Only reachable when no double lies strictly between lo and hi.
        lo + (hi - lo) * 0.5
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Derives `k` child seeds from `seed`; child `i` depends only on `(seed, i)`.
pub fn rng_split(seed: u64, k: usize) -> Vec<u64> {
    let base = mix64(seed ^ 0x6A09_E667_F3BC_C909);
    (0..k as u64)
        .map(|i| mix64(base ^ mix64(i.wrapping_add(1).wrapping_mul(GAMMA))))
        .collect()
}
