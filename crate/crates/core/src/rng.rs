//! Counter-based pseudorandom generation for reproducible experiments.
//!
//! All randomness in this crate flows through [`SplitMix64`], the mixing
//! function of Steele, Lea & Flood (2014). The generator is a pure function
//! of a 64-bit counter, so streams are portable across platforms and trivially
//! splittable: derived seeds come from [`mix`], never from shared state.
//!
//! Gaussian variates use the Box–Muller transform; bounded integers use
//! rejection sampling, so subset draws are exactly uniform.

use crate::float;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `(seed, salt)`.
///
/// Used wherever a reproducible sub-stream is needed (per-trial instances,
/// per-solver fallback draws) so that no two consumers share generator state.
#[inline]
pub fn mix(seed: u64, salt: u64) -> u64 {
    mix64(seed ^ salt.wrapping_mul(GOLDEN_GAMMA).rotate_left(31))
}

/// SplitMix64 generator: `state` advances by the golden gamma, outputs are
/// the mixed counter values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on `(0, 1]`; safe to pass to `ln`.
    #[inline]
    fn next_f64_open_zero(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Unbiased uniform draw from `0..bound` via rejection sampling.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// A pair of independent standard normal variates (Box–Muller).
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64_open_zero();
        let u2 = self.next_f64();
        let radius = float::sqrt(-2.0 * float::ln(u1));
        let angle = 2.0 * core::f64::consts::PI * u2;
        (radius * float::cos(angle), radius * float::sin(angle))
    }

    /// Fills `out` with standard normal variates, consuming pairs in order.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (z0, z1) = self.standard_normal_pair();
            pair[0] = z0;
            pair[1] = z1;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.standard_normal_pair().0;
        }
    }
}
