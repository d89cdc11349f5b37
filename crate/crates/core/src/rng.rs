//! Deterministic 64-bit generator used by all workload generators.
//!
//! This is splitmix64 with the usual constants (Steele, Lea, Flood 2014). It
//! is implemented here rather than pulled from a crate so that traces are
//! bit-reproducible from the seed alone, on any platform and in any port of
//! this tool. Trace file headers record the generator as `splitmix64`.

pub const GENERATOR_NAME: &str = "splitmix64";

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, bound)` by rejection sampling, so the result is
    /// unbiased and identical across ports that follow the same scheme.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < threshold {
                return v % bound;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for j in (1..items.len()).rev() {
            let i = self.below(j as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
