//! Counter-based pseudo-random numbers.
//!
//! Every random quantity in the crate is a pure function of a 64-bit seed and
//! a handful of counter words (trial, row, column, ...). Draws are therefore
//! independent of iteration order and of how work is split across threads,
//! which is what makes parallel Monte Carlo runs bit-reproducible.

/// SplitMix64 finalizer. Full-period scrambling of a 64-bit word.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Scramble a (seed, k1, k2, k3) key into a u64.
#[inline]
pub fn keyed_u64(seed: u64, k1: u64, k2: u64, k3: u64) -> u64 {
    let mut h = splitmix64(seed ^ 0x5851_f42d_4c95_7f2d);
    h = splitmix64(h ^ k1);
    h = splitmix64(h ^ k2.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    h = splitmix64(h ^ k3.wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
    h
}

/// Uniform draw in [0, 1) keyed by (seed, k1, k2, k3).
#[inline]
pub fn keyed_unit(seed: u64, k1: u64, k2: u64, k3: u64) -> f64 {
    // 53 high bits -> double in [0, 1)
    (keyed_u64(seed, k1, k2, k3) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential stream of draws derived from a seed. Used where a natural
/// counter does not exist (e.g. synthetic return paths).
#[derive(Debug, Clone)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            state: splitmix64(seed ^ 0x0d4a_f149_846d_27ad),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        splitmix64(self.state)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = loop {
            let u = self.unit();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
