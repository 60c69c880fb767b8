//! Deterministic pseudo-random numbers for the benchmark generator.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, with Gaussian
//! variates drawn by the Box-Muller transform. Identical seeds produce
//! identical streams on every run of this implementation.

use crate::math;
use core::f64::consts::TAU;

pub(crate) struct Rng {
    state: [u64; 4],
    gaussian_spare: Option<f64>,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        // SplitMix64 expansion of the seed into the xoshiro state.
        let mut x = seed;
        let mut state = [0u64; 4];
        for s in state.iter_mut() {
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            *s = z ^ (z >> 31);
        }
        Rng {
            state,
            gaussian_spare: None,
        }
    }

    fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller; the paired variate is cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(v) = self.gaussian_spare.take() {
            return v;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let radius = math::sqrt(-2.0 * math::ln(u1));
        let (s, c) = math::sin_cos(TAU * u2);
        self.gaussian_spare = Some(radius * s);
        radius * c
    }
}
