//! Seeded, position-addressable random streams.
//!
//! Phase `i` of a stream is read from ChaCha8 word position `2i`, so any
//! phase can be regenerated without replaying the ones before it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

const PHASE_STREAM: u64 = 0;
const GAUSS_STREAM: u64 = 1;

/// SplitMix64 finaliser; used to derive per-sample seeds from a base seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `index` in a run with base seed `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(mix64(base) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

#[inline]
fn unit_from_u64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform angles in [0, 2π), one per prime index.
#[derive(Clone, Debug)]
pub struct PhaseStream {
    rng: ChaCha8Rng,
}

impl PhaseStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PHASE_STREAM);
        Self { rng }
    }

    /// Angle for prime index `index`, independent of any earlier reads.
    pub fn phase_at(&mut self, index: usize) -> f64 {
        self.rng.set_word_pos(2 * index as u128);
        self.next_phase()
    }

    /// Angle for the index following the last one read.
    #[inline]
    pub fn next_phase(&mut self) -> f64 {
        TAU * unit_from_u64(self.rng.next_u64())
    }
}

/// Independent stream of standard normals for the same seed.
pub fn gaussian_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GAUSS_STREAM);
    rng
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
