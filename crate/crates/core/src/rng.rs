//! Counter-based pseudo-random generator for reproducible sampling.
//!
//! SplitMix64 (Steele, Lea & Flood's 64-bit finalizer-based generator):
//! a pure function of a 64-bit state advanced by a fixed odd constant. Each
//! sampled object draws from an independent stream addressed by
//! `(seed, index)`, so results are identical across platforms and across
//! any parallel execution order.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit generator with O(1) stream addressing.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// The `index`-th stream of a seed: used to give every sampled game its
    /// own generator without sharing state across items.
    pub fn stream(seed: u64, index: u64) -> Self {
        Self {
            state: mix(seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA))),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, bound)` by modulo reduction; the bias is below
    /// `bound / 2^64`, irrelevant for the small bounds used here.
    pub fn next_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Uniform in `[lo, hi]` inclusive.
    pub fn next_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.next_below(hi - lo + 1)
    }
}
